"""
Unit tests for YAML reading functionality.
"""

import os
import tempfile

import pytest
import yaml

from ramsey_echo.files import yml


class TestYMLReader:
    """Test cases for YAML reading functionality."""

    def _write(self, text: str) -> str:
        with tempfile.NamedTemporaryFile(mode="w", suffix=".yml", delete=False) as f:
            f.write(text)
            return f.name

    def test_read_valid_yaml_file(self):
        """Test reading a flat run configuration."""
        temp_file = self._write("n: 32\nsigma: 0.1\nmu-range: 0:pi\n")
        try:
            result = yml.read_yaml_file(temp_file)
            assert result == {"n": 32, "sigma": 0.1, "mu-range": "0:pi"}
        finally:
            os.unlink(temp_file)

    def test_read_nonexistent_file(self):
        """Test reading a non-existent file raises FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            yml.read_yaml_file("nonexistent.yml")

    def test_read_empty_yaml_file(self):
        """Test reading an empty YAML file returns empty dict."""
        temp_file = self._write("")
        try:
            assert yml.read_yaml_file(temp_file) == {}
        finally:
            os.unlink(temp_file)

    def test_read_malformed_yaml_file(self):
        """Test a broken document raises YAMLError naming the file."""
        temp_file = self._write("n: [1, 2\n")
        try:
            with pytest.raises(yaml.YAMLError, match="Error parsing YAML file"):
                yml.read_yaml_file(temp_file)
        finally:
            os.unlink(temp_file)

    def test_read_non_mapping_document(self):
        """Test a top-level list is rejected."""
        temp_file = self._write("- 1\n- 2\n")
        try:
            with pytest.raises(ValueError, match="must contain a mapping"):
                yml.read_yaml_file(temp_file)
        finally:
            os.unlink(temp_file)

    def test_validate_yaml_structure(self):
        """Test unknown keys are reported in file order."""
        allowed = ["n", "sigma"]

        assert yml.validate_yaml_structure({"n": 8, "sigma": 0.1}, allowed) == []
        assert yml.validate_yaml_structure({"n": 8, "grids": 3, "N": 4}, allowed) == ["grids", "N"]
        assert yml.validate_yaml_structure(["not", "a", "dict"], allowed) == ["<document is not a mapping>"]
