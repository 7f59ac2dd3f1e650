"""
Unit tests for the command-line front end.
"""

import csv
import io
import json
import math

import pytest

from ramsey_echo import cli
from ramsey_echo.verify import CheckResult, VerificationReport


def _read_csv(text: str) -> tuple[list[str], list[list[str]], list[str]]:
    header = [line for line in text.splitlines() if line.startswith("#")]
    body = [line for line in text.splitlines() if not line.startswith("#")]
    rows = list(csv.reader(io.StringIO("\n".join(body))))
    return header, rows[1:], rows[0]


class TestLandscapeCommand:
    """Test cases for the landscape command."""

    def test_small_grid(self, tmp_path):
        target = tmp_path / "landscape.csv"
        assert cli.run(["landscape", "--n", "4", "--grid", "3x3", "--out", str(target)]) == cli.EXIT_OK

        header, rows, columns = _read_csv(target.read_text(encoding="utf-8"))
        assert header[0].startswith("# ramsey-echo ")
        assert header[1] == "# command: landscape"
        assert json.loads(header[2].removeprefix("# config: "))["n_particles"] == 4
        assert tuple(columns) == cli.LANDSCAPE_COLUMNS
        assert len(rows) == 9
        corner = rows[1]
        assert float(corner[0]) == 0.0
        assert float(corner[1]) == 0.0
        assert float(corner[2]) == pytest.approx(2.0, rel=1e-12)
        assert corner[9] == "Squeezing"

    def test_output_does_not_depend_on_threads(self, tmp_path):
        outputs = []
        for threads in ("1", "3"):
            target = tmp_path / f"landscape_{threads}.csv"
            argv = ["landscape", "--n", "8", "--grid", "40x17", "--sigma", "0.1", "--threads", threads]
            assert cli.run([*argv, "--out", str(target)]) == cli.EXIT_OK
            outputs.append(target.read_bytes())
        assert outputs[0] == outputs[1]

    def test_batch_writes_one_file_per_particle_number(self, tmp_path):
        target = tmp_path / "batch.csv"
        assert cli.run(["landscape", "--n-list", "2,4", "--grid", "3x5", "--out", str(target)]) == cli.EXIT_OK
        for n in (2, 4):
            _, rows, _ = _read_csv((tmp_path / f"batch_N{n}.csv").read_text(encoding="utf-8"))
            assert len(rows) == 15

    def test_json_to_stdout(self, capsys):
        assert cli.run(["landscape", "--n", "4", "--grid", "2x2", "--format", "json"]) == cli.EXIT_OK
        document = json.loads(capsys.readouterr().out)
        assert document["command"] == "landscape"
        assert len(document["rows"]) == 4

    def test_configuration_file(self, tmp_path, capsys):
        config = tmp_path / "run.yml"
        config.write_text("n: 4\ngrid: 2x3\nmu-range: 0:pi/2\n", encoding="utf-8")
        assert cli.run(["landscape", "--config", str(config), "--grid", "2x2"]) == cli.EXIT_OK
        _, rows, _ = _read_csv(capsys.readouterr().out)
        assert len(rows) == 4
        assert float(rows[-1][0]) == pytest.approx(math.pi / 2)


class TestSliceCommand:
    """Test cases for the slice command."""

    def test_rows_respect_the_fisher_bound(self, tmp_path):
        target = tmp_path / "slice.csv"
        argv = ["slice", "--n", "8", "--mu-count", "3", "--nu-count", "33", "--sigma-list", "0,0.1"]
        assert cli.run([*argv, "--out", str(target)]) == cli.EXIT_OK

        _, rows, columns = _read_csv(target.read_text(encoding="utf-8"))
        assert tuple(columns) == cli.SLICE_COLUMNS
        assert len(rows) == 6
        assert [float(row[0]) for row in rows] == [0.0, 0.0, 0.0, 0.1, 0.1, 0.1]
        assert float(rows[0][3]) == pytest.approx(1.0, rel=1e-9)
        for row in rows:
            assert float(row[3]) <= float(row[5]) * (1 + 1e-9)
            assert float(row[5]) <= float(row[4]) * (1 + 1e-8)

    def test_individual_dephasing_is_rejected(self, tmp_path):
        config = tmp_path / "slice.yml"
        config.write_text("n: 8\nSigma: 0.5\n", encoding="utf-8")
        assert cli.run(["slice", "--config", str(config)]) == cli.EXIT_INVALID


class TestScalingCommand:
    """Test cases for the scaling command."""

    def test_single_class_report(self, capsys):
        argv = ["scaling", "--n-list", "16,24,32,48", "--classes", "GHZ", "--resolution", "9"]
        assert cli.run(argv) == cli.EXIT_OK
        _, rows, columns = _read_csv(capsys.readouterr().out)
        assert tuple(columns) == cli.SCALING_COLUMNS
        assert len(rows) == 1
        assert rows[0][0] == "GHZ"
        assert rows[0][6:] == ["16", "48"]

    def test_short_particle_list_is_invalid(self):
        assert cli.run(["scaling", "--n-list", "16,32"]) == cli.EXIT_INVALID


class TestVerifyCommand:
    """Test cases for the verify command."""

    def _report(self, passed: bool) -> VerificationReport:
        return VerificationReport(
            results=(
                CheckResult("ramsey_anchor", True, 0.0, 1e-9),
                CheckResult("moment_formulas_noiseless", passed, 0.0 if passed else 0.5, 1e-9),
            )
        )

    def test_passing_suite(self, monkeypatch, capsys):
        monkeypatch.setattr(cli, "run_verification", lambda quick: self._report(True))
        assert cli.run(["verify", "--quick"]) == cli.EXIT_OK
        assert "# passed: true" in capsys.readouterr().out

    def test_failing_suite(self, monkeypatch, capsys):
        monkeypatch.setattr(cli, "run_verification", lambda quick: self._report(False))
        assert cli.run(["verify"]) == cli.EXIT_VERIFICATION_FAILED
        _, rows, _ = _read_csv(capsys.readouterr().out)
        assert rows[1][:2] == ["moment_formulas_noiseless", "false"]

    def test_quick_flag_reaches_the_suite(self, monkeypatch):
        seen = []

        def fake(quick):
            seen.append(quick)
            return self._report(True)

        monkeypatch.setattr(cli, "run_verification", fake)
        cli.run(["verify", "--quick"])
        cli.run(["verify"])
        assert seen == [True, False]


class TestWignerCommand:
    """Test cases for the wigner command."""

    def test_fields_and_overlaps(self, tmp_path):
        target = tmp_path / "wigner.csv"
        argv = ["wigner", "--n", "4", "--mu", "pi/2", "--phi", "-0.02", "--theta-count", "5", "--phi-count", "9"]
        assert cli.run([*argv, "--out", str(target)]) == cli.EXIT_OK

        header, rows, columns = _read_csv(target.read_text(encoding="utf-8"))
        assert tuple(columns) == cli.WIGNER_COLUMNS
        assert len(rows) == 2 * 5 * 9
        assert {row[0] for row in rows} == {"state", "measurement"}
        metadata = dict(line.removeprefix("# ").split(": ", 1) for line in header[3:])
        assert float(metadata["overlap"]) == pytest.approx(float(metadata["oracle_expectation"]), rel=1e-9, abs=1e-12)
        assert float(metadata["quadrature_overlap"]) == pytest.approx(float(metadata["overlap"]), rel=1e-9, abs=1e-12)


class TestErrors:
    """Test cases for exit codes on bad input."""

    def test_unwritable_output(self, tmp_path):
        target = tmp_path / "missing" / "landscape.csv"
        assert cli.run(["landscape", "--n", "4", "--grid", "2x2", "--out", str(target)]) == cli.EXIT_IO_ERROR

    def test_missing_configuration_file(self, tmp_path):
        assert cli.run(["landscape", "--config", str(tmp_path / "nope.yml")]) == cli.EXIT_IO_ERROR

    @pytest.mark.parametrize(
        "argv",
        [
            [],
            ["landscape", "--bogus"],
            ["landscape", "--format", "xml"],
            ["landscape", "--n", "many"],
            ["landscape", "--n", "1"],
            ["landscape", "--grid", "1x4"],
            ["wigner", "--theta-count", "-3"],
        ],
    )
    def test_invalid_input(self, argv):
        assert cli.run(argv) == cli.EXIT_INVALID

    def test_unknown_configuration_key(self, tmp_path):
        config = tmp_path / "run.yml"
        config.write_text("n: 4\ngrids: 3x3\n", encoding="utf-8")
        assert cli.run(["landscape", "--config", str(config)]) == cli.EXIT_INVALID

    def test_version(self, capsys):
        assert cli.run(["--version"]) == cli.EXIT_OK
        assert capsys.readouterr().out.startswith("ramsey_echo ")
