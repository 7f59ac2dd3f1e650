"""
Unit tests for run configuration parsing functionality.
"""

import math
import os
import tempfile
from pathlib import Path

import pytest

from ramsey_echo.optimizer.landscape import ProtocolClass
from ramsey_echo.run_config import parser as config_parser
from ramsey_echo.run_config.parser import RunConfig, RunConfigParser

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


class TestValueParsers:
    """Test cases for the individual value parsers."""

    @pytest.mark.parametrize(
        ("text", "expected"),
        [
            ("pi", math.pi),
            ("-pi/2", -math.pi / 2),
            ("0.5pi", math.pi / 2),
            ("3*pi/4", 3 * math.pi / 4),
            ("PI", math.pi),
            ("-0.02", -0.02),
            (1, 1.0),
            (2.5, 2.5),
        ],
    )
    def test_parse_angle(self, text, expected):
        """Test numbers and multiples of pi."""
        assert config_parser.parse_angle(text) == pytest.approx(expected, rel=1e-15)

    @pytest.mark.parametrize("text", ["pie", "pi/0", "", True])
    def test_parse_angle_rejects_garbage(self, text):
        """Test values that are not angles."""
        with pytest.raises(ValueError):
            config_parser.parse_angle(text)

    def test_parse_range(self):
        """Test ranges from strings and lists."""
        assert config_parser.parse_range("0:pi") == pytest.approx((0.0, math.pi))
        assert config_parser.parse_range("-pi:pi") == pytest.approx((-math.pi, math.pi))
        assert config_parser.parse_range([0, "pi/2"]) == pytest.approx((0.0, math.pi / 2))
        with pytest.raises(ValueError, match="Range must have the form min:max"):
            config_parser.parse_range("0:1:2")

    def test_parse_grid(self):
        """Test MUxNU grid specifications."""
        assert config_parser.parse_grid("257x513") == (257, 513)
        assert config_parser.parse_grid("65X129") == (65, 129)
        with pytest.raises(ValueError, match="Grid must have the form"):
            config_parser.parse_grid("65")
        with pytest.raises(ValueError, match="Grid counts must be integers"):
            config_parser.parse_grid("65xabc")

    def test_parse_lists(self):
        """Test comma separated and YAML lists."""
        assert config_parser.parse_int_list("64,128, 256") == (64, 128, 256)
        assert config_parser.parse_int_list([16, 32]) == (16, 32)
        assert config_parser.parse_float_list("0,0.1,0.5") == (0.0, 0.1, 0.5)
        with pytest.raises(ValueError, match="list of integers"):
            config_parser.parse_int_list("16,many")

    def test_parse_classes(self):
        """Test class names are case-insensitive and OUT is accepted."""
        assert config_parser.parse_classes("squeezing,OUT,ghz") == (
            ProtocolClass.SQUEEZING,
            ProtocolClass.OVER_UN_TWISTING,
            ProtocolClass.GHZ,
        )
        with pytest.raises(ValueError, match="Unknown protocol class"):
            config_parser.parse_classes("Twisting")

    def test_parse_bool(self):
        """Test boolean spellings."""
        assert config_parser.parse_bool("yes") is True
        assert config_parser.parse_bool("off") is False
        with pytest.raises(ValueError, match="Expected a boolean"):
            config_parser.parse_bool("maybe")


class TestRunConfigParser:
    """Test cases for building run configurations."""

    def setup_method(self):
        """Set up test fixtures."""
        self.parser = RunConfigParser()
        self.valid_yaml_content = {
            "n": 16,
            "sigma": 0.1,
            "mu-range": "0:pi",
            "nu-range": "-pi:pi",
            "grid": "65x129",
            "format": "json",
        }

    def test_parse_valid_mapping(self):
        """Test parsing a valid configuration mapping."""
        config = self.parser.parse_mapping(self.valid_yaml_content, "landscape")

        assert isinstance(config, RunConfig)
        assert config.command == "landscape"
        assert config.n_particles == 16
        assert config.sigma == 0.1
        assert config.grid == (65, 129)
        assert config.output_format == "json"
        assert config.noise.collective == 0.1
        assert config.noise.individual == 0.0

    def test_unknown_keys_are_rejected(self):
        """Test parsing a mapping with a misspelled key."""
        invalid_yaml = {**self.valid_yaml_content, "grids": "3x3"}
        with pytest.raises(ValueError, match="Unknown configuration keys"):
            self.parser.parse_mapping(invalid_yaml, "landscape")

    def test_invalid_value_names_the_key(self):
        """Test a value that cannot be converted."""
        with pytest.raises(ValueError, match="Invalid value for 'n'"):
            self.parser.parse_mapping({"n": "many"}, "landscape")

    def test_none_values_are_ignored(self):
        """Test unset overrides keep the base value."""
        base = self.parser.parse_mapping(self.valid_yaml_content, "landscape")
        config = self.parser.parse_mapping({"n": None, "sigma": None}, "landscape", base=base)
        assert config.n_particles == 16
        assert config.sigma == 0.1

    def test_file_with_overrides(self):
        """Test command-line overrides take precedence over the file."""
        with tempfile.NamedTemporaryFile(mode="w", suffix=".yml", delete=False) as f:
            f.write("n: 16\nsigma: 0.1\nmu-range: 0:pi/2\n")
            temp_file = f.name

        try:
            config = self.parser.from_sources("slice", temp_file, {"sigma": "0.5", "mu-count": 9})
            assert config.command == "slice"
            assert config.n_particles == 16
            assert config.sigma == 0.5
            assert config.mu_count == 9
            assert config.mu_range == pytest.approx((0.0, math.pi / 2))
        finally:
            os.unlink(temp_file)

    def test_missing_file(self):
        """Test parsing a configuration file that does not exist."""
        with pytest.raises(FileNotFoundError):
            self.parser.parse_file("nonexistent.yml", "landscape")

    def test_echo_leaves_out_run_details(self):
        """Test the header echo skips threads and output path."""
        config = RunConfig(command="scaling", out="fit.csv", threads=3)
        echo = config.echo()
        assert "threads" not in echo
        assert "out" not in echo
        assert echo["classes"] == ["Squeezing", "OverUnTwisting", "GHZ"]
        assert echo["command"] == "scaling"


class TestRunConfigValidation:
    """Test cases for run configuration validation."""

    def setup_method(self):
        """Set up test fixtures."""
        self.parser = RunConfigParser()

    def test_defaults_are_valid(self):
        """Test every command's defaults pass except scaling, which needs an N list."""
        for command in ("landscape", "slice", "verify", "wigner"):
            assert self.parser.validate(RunConfig(command=command)) == []

    def test_unknown_command(self):
        """Test an unknown command name."""
        errors = self.parser.validate(RunConfig(command="plot"))
        assert any("Unknown command" in error for error in errors)

    def test_landscape_needs_two_particles(self):
        """Test classification requires N >= 2."""
        errors = self.parser.validate(RunConfig(command="landscape", n_particles=1))
        assert errors == ["Particle number must be >= 2, got 1"]
        assert self.parser.validate(RunConfig(command="verify", n_particles=1)) == []

    def test_batch_entries_are_checked(self):
        """Test each N of a landscape batch."""
        errors = self.parser.validate(RunConfig(command="landscape", n_list=(1, 4)))
        assert errors == ["Particle number must be >= 2, got 1"]

    def test_noise_must_be_non_negative(self):
        """Test negative and non-finite dephasing strengths."""
        errors = self.parser.validate(RunConfig(command="landscape", sigma=-0.1, big_sigma=math.nan))
        assert len(errors) == 2
        errors = self.parser.validate(RunConfig(command="scaling", sigma_list=(0.1, -1.0), n_list=(16, 32, 64, 128)))
        assert errors == ["sigma-list entries must be finite and >= 0, got [0.1, -1.0]"]

    def test_ranges_grid_threads_and_format(self):
        """Test the shared numeric options."""
        config = RunConfig(command="landscape", mu_range=(1.0, 0.0), grid=(1, 5), threads=0, output_format="xml")
        errors = self.parser.validate(config)
        assert len(errors) == 4
        assert any(error.startswith("mu-range") for error in errors)
        assert any(error.startswith("Grid counts") for error in errors)
        assert any(error.startswith("threads") for error in errors)
        assert any(error.startswith("format") for error in errors)

    def test_slice_rejects_individual_dephasing(self):
        """Test the slice command compares against collective-noise QFI only."""
        errors = self.parser.validate(RunConfig(command="slice", big_sigma=0.5))
        assert any("collective dephasing only" in error for error in errors)

    def test_slice_counts(self):
        """Test slice sample counts."""
        errors = self.parser.validate(RunConfig(command="slice", mu_count=0, nu_count=2))
        assert len(errors) == 2

    def test_scaling_n_list(self):
        """Test the particle number list of a scaling run."""
        assert self.parser.validate(RunConfig(command="scaling", n_list=(16, 32, 64, 128))) == []
        assert self.parser.validate(RunConfig(command="scaling")) == ["n-list needs at least 4 entries, got 0"]
        errors = self.parser.validate(RunConfig(command="scaling", n_list=(16, 32, 32, 64)))
        assert errors == ["n-list must be strictly increasing, got [16, 32, 32, 64]"]
        errors = self.parser.validate(RunConfig(command="scaling", n_list=(8, 16, 32, 64)))
        assert errors == ["n-list entries must be >= 16, got 8"]

    def test_scaling_classes_and_resolution(self):
        """Test scaling needs classes and a usable resolution."""
        config = RunConfig(command="scaling", n_list=(16, 32, 64, 128), classes=(), resolution=2)
        assert len(self.parser.validate(config)) == 2

    def test_wigner_counts(self):
        """Test negative sample counts."""
        errors = self.parser.validate(RunConfig(command="wigner", theta_count=-1))
        assert errors == ["theta-count and phi-count must be >= 0"]

    @pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.yml")), ids=lambda path: path.name)
    def test_example_configurations_are_valid(self, path):
        """Test the shipped example files parse and validate for their command."""
        command = path.stem.split("_")[0]
        config = self.parser.parse_file(str(path), command)
        assert self.parser.validate(config) == []
