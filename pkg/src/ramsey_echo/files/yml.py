"""
YAML file handling for run configurations.

Configurations are flat YAML mappings whose keys mirror the command-line flags.
"""

from pathlib import Path
from typing import Any

import yaml

from ramsey_echo.logger import logging_helper

logger = logging_helper.get_logger(__name__)


def read_yaml_file(file_path: str) -> dict[str, Any]:
    """
    Read and parse a YAML configuration file.

    Args:
        file_path: Path to the YAML file to read

    Returns:
        dict[str, Any]: Parsed YAML content (empty for an empty file)

    Raises:
        FileNotFoundError: If the specified file doesn't exist
        yaml.YAMLError: If the YAML file is malformed
        ValueError: If the document is not a mapping
    """
    file_path_obj = Path(file_path)
    if not file_path_obj.exists():
        raise FileNotFoundError(f"YAML file not found: {file_path}")

    try:
        with open(file_path_obj, encoding="utf-8") as file:
            content = yaml.safe_load(file)
    except yaml.YAMLError as e:
        raise yaml.YAMLError(f"Error parsing YAML file {file_path}: {e}") from e

    if content is None:
        logger.debug(f"Empty configuration file: {file_path}")
        return {}

    if not isinstance(content, dict):
        raise ValueError(f"YAML file {file_path} must contain a mapping, got {type(content).__name__}")

    return content


def validate_yaml_structure(yaml_content: dict[str, Any], allowed_keys: list[str]) -> list[str]:
    """
    Report keys of a configuration mapping that are not recognised.

    Args:
        yaml_content: The parsed YAML content
        allowed_keys: Keys a configuration may contain

    Returns:
        list[str]: Unknown keys in file order (empty when all are known)
    """
    if not isinstance(yaml_content, dict):
        return ["<document is not a mapping>"]

    return [str(key) for key in yaml_content if key not in allowed_keys]

