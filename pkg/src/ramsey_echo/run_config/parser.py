"""
Run configuration parser.

A run is configured by an optional YAML file whose keys mirror the command
line flags, with flags given on the command line taking precedence.
"""

import math
import os
import re
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Optional

from ramsey_echo.core.core import NoiseModel
from ramsey_echo.files import tables, yml
from ramsey_echo.logger import logging_helper
from ramsey_echo.optimizer.landscape import ProtocolClass
from ramsey_echo.optimizer.scaling import MIN_FIT_PARTICLES, MIN_FIT_POINTS

COMMANDS = ("landscape", "slice", "scaling", "verify", "wigner")

ALLOWED_KEYS = [
    "n",
    "n-list",
    "sigma",
    "Sigma",
    "sigma-list",
    "Sigma-list",
    "mu-range",
    "nu-range",
    "grid",
    "mu-count",
    "nu-count",
    "classes",
    "resolution",
    "mu",
    "phi",
    "theta-count",
    "phi-count",
    "out",
    "format",
    "threads",
    "quick",
]

ANGLE_PATTERN = re.compile(
    r"^\s*(?P<sign>[+-]?)\s*(?P<coefficient>(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?)?\s*\*?\s*pi\s*"
    r"(/\s*(?P<divisor>\d+(\.\d*)?))?\s*$"
)


def parse_angle(value: Any) -> float:
    """
    Parse an angle given as a number or a multiple of pi.

    Accepts plain numbers and strings such as "pi", "-pi/2", "0.5pi" or "3*pi/4".

    Raises:
        ValueError: If the value is neither
    """
    if isinstance(value, bool):
        msg = f"Not an angle: {value!r}"
        raise ValueError(msg)
    if isinstance(value, (int, float)):
        return float(value)

    text = str(value).strip().lower()
    match = ANGLE_PATTERN.match(text)
    if match:
        coefficient = float(match.group("coefficient")) if match.group("coefficient") else 1.0
        divisor = float(match.group("divisor")) if match.group("divisor") else 1.0
        if divisor == 0:
            msg = f"Division by zero in angle {value!r}"
            raise ValueError(msg)
        sign = -1.0 if match.group("sign") == "-" else 1.0
        return sign * coefficient * math.pi / divisor
    try:
        return float(text)
    except ValueError as e:
        raise ValueError(f"Not an angle: {value!r}") from e


def parse_range(value: Any) -> tuple[float, float]:
    """Parse "a:b" (or a two-element list) into a pair of angles."""
    parts = value if isinstance(value, (list, tuple)) else str(value).split(":")
    if len(parts) != 2:
        msg = f"Range must have the form min:max, got {value!r}"
        raise ValueError(msg)
    return parse_angle(parts[0]), parse_angle(parts[1])


def parse_grid(value: Any) -> tuple[int, int]:
    """Parse "MUxNU" such as "257x513"."""
    parts = str(value).lower().split("x")
    if len(parts) != 2:
        msg = f"Grid must have the form MUxNU, got {value!r}"
        raise ValueError(msg)
    try:
        return int(parts[0]), int(parts[1])
    except ValueError as e:
        raise ValueError(f"Grid counts must be integers, got {value!r}") from e


def parse_int_list(value: Any) -> tuple[int, ...]:
    """Parse "2,4,8" or a YAML list of integers."""
    items = value if isinstance(value, (list, tuple)) else [item for item in str(value).split(",") if item.strip()]
    try:
        return tuple(int(item) for item in items)
    except (TypeError, ValueError) as e:
        raise ValueError(f"Expected a comma separated list of integers, got {value!r}") from e


def parse_float_list(value: Any) -> tuple[float, ...]:
    """Parse "0,0.1,0.5" or a YAML list of numbers."""
    items = value if isinstance(value, (list, tuple)) else [item for item in str(value).split(",") if item.strip()]
    try:
        return tuple(float(item) for item in items)
    except (TypeError, ValueError) as e:
        raise ValueError(f"Expected a comma separated list of numbers, got {value!r}") from e


def parse_classes(value: Any) -> tuple[ProtocolClass, ...]:
    """Parse protocol class names such as "Squeezing,OverUnTwisting,GHZ"."""
    items = value if isinstance(value, (list, tuple)) else [item for item in str(value).split(",") if item.strip()]
    by_name = {cls.value.lower(): cls for cls in ProtocolClass}
    by_name["out"] = ProtocolClass.OVER_UN_TWISTING
    classes = []
    for item in items:
        key = str(item).strip().lower()
        if key not in by_name:
            msg = f"Unknown protocol class {item!r}; expected one of {[cls.value for cls in ProtocolClass]}"
            raise ValueError(msg)
        classes.append(by_name[key])
    return tuple(classes)


def parse_bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("true", "yes", "1", "on"):
        return True
    if text in ("false", "no", "0", "off"):
        return False
    msg = f"Expected a boolean, got {value!r}"
    raise ValueError(msg)


@dataclass(frozen=True)
class RunConfig:
    """Parameters of one command invocation."""

    command: str
    n_particles: int = 32
    n_list: tuple[int, ...] = ()
    sigma: float = 0.0
    big_sigma: float = 0.0
    sigma_list: tuple[float, ...] = ()
    big_sigma_list: tuple[float, ...] = ()
    mu_range: tuple[float, float] = (0.0, math.pi)
    nu_range: tuple[float, float] = (-math.pi, math.pi)
    grid: tuple[int, int] = (257, 513)
    mu_count: int = 65
    nu_count: int = 513
    classes: tuple[ProtocolClass, ...] = tuple(ProtocolClass)
    resolution: int = 65
    mu: float = math.pi / 2
    phi: float = -0.02
    theta_count: int = 0
    phi_count: int = 0
    out: Optional[str] = None
    output_format: str = "csv"
    threads: int = field(default_factory=lambda: os.cpu_count() or 1)
    quick: bool = False

    @property
    def noise(self) -> NoiseModel:
        return NoiseModel(collective=self.sigma, individual=self.big_sigma)

    def echo(self) -> dict[str, Any]:
        """Plain mapping of the configuration for file headers; thread count and output path are left out."""
        values = asdict(self)
        values.pop("threads")
        values.pop("out")
        values["classes"] = [cls.value for cls in self.classes]
        return values


class RunConfigParser:
    """Builds and validates RunConfig objects from YAML files and flag overrides."""

    def __init__(self):
        """Initialize the run configuration parser."""
        self.logger = logging_helper.get_logger(__name__)
        self.converters = {
            "n": ("n_particles", int),
            "n-list": ("n_list", parse_int_list),
            "sigma": ("sigma", float),
            "Sigma": ("big_sigma", float),
            "sigma-list": ("sigma_list", parse_float_list),
            "Sigma-list": ("big_sigma_list", parse_float_list),
            "mu-range": ("mu_range", parse_range),
            "nu-range": ("nu_range", parse_range),
            "grid": ("grid", parse_grid),
            "mu-count": ("mu_count", int),
            "nu-count": ("nu_count", int),
            "classes": ("classes", parse_classes),
            "resolution": ("resolution", int),
            "mu": ("mu", parse_angle),
            "phi": ("phi", parse_angle),
            "theta-count": ("theta_count", int),
            "phi-count": ("phi_count", int),
            "out": ("out", str),
            "format": ("output_format", str),
            "threads": ("threads", int),
            "quick": ("quick", parse_bool),
        }

    def parse_mapping(self, content: dict[str, Any], command: str, base: Optional[RunConfig] = None) -> RunConfig:
        """
        Apply a mapping of configuration keys to a RunConfig.

        Args:
            content: Keys as in ALLOWED_KEYS; None values are ignored
            command: Command the configuration is for
            base: Configuration to start from (defaults otherwise)

        Returns:
            RunConfig: The updated configuration

        Raises:
            ValueError: For unknown keys or malformed values
        """
        unknown = yml.validate_yaml_structure(content, ALLOWED_KEYS)
        if unknown:
            raise ValueError(f"Unknown configuration keys: {unknown}")

        updates = {}
        for key, value in content.items():
            if value is None:
                continue
            name, convert = self.converters[key]
            try:
                updates[name] = convert(value)
            except (TypeError, ValueError) as e:
                raise ValueError(f"Invalid value for '{key}': {e}") from e

        return replace(base or RunConfig(command=command), command=command, **updates)

    def parse_file(self, file_path: str, command: str) -> RunConfig:
        """
        Parse a YAML run configuration file.

        Raises:
            FileNotFoundError: If the file doesn't exist
            ValueError: If the content is invalid
        """
        try:
            return self.parse_mapping(yml.read_yaml_file(file_path), command)
        except Exception as e:
            self.logger.error(f"Error parsing run configuration {file_path}: {e}")
            raise

    def from_sources(self, command: str, file_path: Optional[str], overrides: dict[str, Any]) -> RunConfig:
        """Configuration file (if any) with command-line overrides applied on top."""
        config = self.parse_file(file_path, command) if file_path else RunConfig(command=command)
        return self.parse_mapping(overrides, command, base=config)

    def validate(self, config: RunConfig) -> list[str]:
        """
        Validate a run configuration and return any validation errors.

        Args:
            config: The configuration to validate

        Returns:
            List[str]: List of validation error messages (empty if valid)
        """
        errors = []

        if config.command not in COMMANDS:
            errors.append(f"Unknown command '{config.command}'; expected one of {COMMANDS}")

        minimum_n = 2 if config.command in ("landscape", "slice", "wigner") else 1
        for n_particles in config.n_list or (config.n_particles,):
            if n_particles < minimum_n:
                errors.append(f"Particle number must be >= {minimum_n}, got {n_particles}")

        for name, value in (("sigma", config.sigma), ("Sigma", config.big_sigma)):
            if not math.isfinite(value) or value < 0:
                errors.append(f"{name} must be finite and >= 0, got {value}")
        for name, values in (("sigma-list", config.sigma_list), ("Sigma-list", config.big_sigma_list)):
            if any(not math.isfinite(value) or value < 0 for value in values):
                errors.append(f"{name} entries must be finite and >= 0, got {list(values)}")

        for name, (low, high) in (("mu-range", config.mu_range), ("nu-range", config.nu_range)):
            if not (math.isfinite(low) and math.isfinite(high)) or high <= low:
                errors.append(f"{name} must satisfy min < max with finite bounds, got {low}:{high}")

        if min(config.grid) < 2:
            errors.append(f"Grid counts must be >= 2, got {config.grid[0]}x{config.grid[1]}")
        if config.threads < 1:
            errors.append(f"threads must be >= 1, got {config.threads}")
        if config.output_format not in tables.FORMATS:
            errors.append(f"format must be one of {tables.FORMATS}, got '{config.output_format}'")

        if config.command == "slice":
            if config.mu_count < 1:
                errors.append(f"mu-count must be >= 1, got {config.mu_count}")
            if config.nu_count < 3:
                errors.append(f"nu-count must be >= 3, got {config.nu_count}")
            if config.big_sigma > 0 or config.big_sigma_list:
                errors.append("slice compares with the Fisher information and supports collective dephasing only")

        if config.command == "scaling":
            n_list = config.n_list
            if len(n_list) < MIN_FIT_POINTS:
                errors.append(f"n-list needs at least {MIN_FIT_POINTS} entries, got {len(n_list)}")
            if any(b <= a for a, b in zip(n_list, n_list[1:])):
                errors.append(f"n-list must be strictly increasing, got {list(n_list)}")
            if n_list and min(n_list) < MIN_FIT_PARTICLES:
                errors.append(f"n-list entries must be >= {MIN_FIT_PARTICLES}, got {min(n_list)}")
            if not config.classes:
                errors.append("classes must name at least one protocol class")
            if config.resolution < 3:
                errors.append(f"resolution must be >= 3, got {config.resolution}")

        if config.command == "wigner" and (config.theta_count < 0 or config.phi_count < 0):
            errors.append("theta-count and phi-count must be >= 0")

        return errors
