"""
Shared domain types and numerically stable primitives.

Every other module evaluates protocols at a ProtocolPoint: a particle number,
the initial twisting strength mu, the excess inversion nu and a NoiseModel.
"""

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
import numpy.typing as npt

ArrayLike = Union[float, npt.NDArray[np.float64]]

UNIT_NORM_TOL = 1e-12
# Preference order when a direction has to be picked canonically: z, then y, then x.
CANONICAL_AXIS_ORDER = (2, 1, 0)


@dataclass(frozen=True)
class NoiseModel:
    """
    Dephasing strengths relative to the twisting coupling.

    Attributes:
        collective: sigma = |gamma_C| / |chi|, collective S_z dephasing
        individual: Sigma = |gamma_I| / |chi|, independent single-qubit dephasing
    """

    collective: float = 0.0
    individual: float = 0.0

    def __post_init__(self):
        for name, value in (("collective", self.collective), ("individual", self.individual)):
            if not math.isfinite(value) or value < 0:
                msg = f"Dephasing strength '{name}' must be finite and >= 0, got {value}"
                raise ValueError(msg)

    @property
    def is_noiseless(self) -> bool:
        return self.collective == 0 and self.individual == 0


@dataclass(frozen=True)
class ProtocolPoint:
    """One evaluation site of an echo protocol."""

    n_particles: int
    mu: float
    nu: float
    noise: NoiseModel = field(default_factory=NoiseModel)

    def __post_init__(self):
        if int(self.n_particles) != self.n_particles or self.n_particles < 1:
            msg = f"Particle number must be an integer >= 1, got {self.n_particles}"
            raise ValueError(msg)
        if not (math.isfinite(self.mu) and math.isfinite(self.nu)):
            msg = f"Twisting angles must be finite, got mu={self.mu}, nu={self.nu}"
            raise ValueError(msg)

    @property
    def spin(self) -> float:
        """Total spin S = N/2."""
        return self.n_particles / 2


@dataclass(frozen=True)
class Direction:
    """Unit 3-vector used for signal rotation axes and measurement axes."""

    components: tuple[float, float, float]

    def __post_init__(self):
        if len(self.components) != 3:
            msg = f"Direction needs three components, got {len(self.components)}"
            raise ValueError(msg)
        norm = math.sqrt(sum(c * c for c in self.components))
        if abs(norm - 1.0) > UNIT_NORM_TOL:
            msg = f"Direction must have unit norm, got norm {norm}"
            raise ValueError(msg)

    @classmethod
    def from_vector(cls, vector: npt.ArrayLike) -> "Direction":
        """
        Normalize any nonzero 3-vector into a Direction.

        Raises:
            ValueError: If the vector is zero, non-finite or not of length 3
        """
        array = np.asarray(vector, dtype=float).reshape(-1)
        if array.shape != (3,) or not np.all(np.isfinite(array)):
            msg = f"Direction needs three finite components, got {vector}"
            raise ValueError(msg)
        norm = float(np.linalg.norm(array))
        if norm == 0:
            msg = "Cannot build a direction from the zero vector"
            raise ValueError(msg)
        unit = array / norm
        return cls((float(unit[0]), float(unit[1]), float(unit[2])))

    @classmethod
    def axis(cls, name: str) -> "Direction":
        """Cartesian unit vector 'x', 'y' or 'z', optionally prefixed with '-'."""
        sign = -1.0 if name.startswith("-") else 1.0
        index = "xyz".find(name.lstrip("+-"))
        if index < 0 or len(name.lstrip("+-")) != 1:
            msg = f"Unknown axis name: {name}"
            raise ValueError(msg)
        vector = [0.0, 0.0, 0.0]
        vector[index] = sign
        return cls((vector[0], vector[1], vector[2]))

    def as_array(self) -> npt.NDArray[np.float64]:
        return np.array(self.components, dtype=float)


@dataclass(frozen=True)
class ParameterGrid:
    """Rectangular (mu, nu) sampling; rows are mu, columns are nu."""

    mu_values: tuple[float, ...]
    nu_values: tuple[float, ...]

    def __post_init__(self):
        for name, values in (("mu_values", self.mu_values), ("nu_values", self.nu_values)):
            array = np.asarray(values, dtype=float)
            if array.size == 0:
                msg = f"{name} must not be empty"
                raise ValueError(msg)
            if not np.all(np.isfinite(array)):
                msg = f"{name} must be finite"
                raise ValueError(msg)
            if np.any(np.diff(array) <= 0):
                msg = f"{name} must be strictly increasing"
                raise ValueError(msg)

    @classmethod
    def from_arrays(cls, mu_values: npt.ArrayLike, nu_values: npt.ArrayLike) -> "ParameterGrid":
        mu = tuple(float(v) for v in np.asarray(mu_values, dtype=float).reshape(-1))
        nu = tuple(float(v) for v in np.asarray(nu_values, dtype=float).reshape(-1))
        return cls(mu, nu)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.mu_values), len(self.nu_values)

    @property
    def mu_array(self) -> npt.NDArray[np.float64]:
        return np.asarray(self.mu_values, dtype=float)

    @property
    def nu_array(self) -> npt.NDArray[np.float64]:
        return np.asarray(self.nu_values, dtype=float)


def stable_cos_pow(c: ArrayLike, k: Union[int, npt.NDArray[np.int_]]) -> ArrayLike:
    """
    Evaluate c**k as sign(c)**k * exp(k * ln|c|).

    Large exponents (k ~ N) underflow gracefully instead of accumulating
    rounding through repeated multiplication. c = 0 gives 0 for k > 0 and 1
    for k = 0.

    Args:
        c: Base in [-1, 1], scalar or array
        k: Non-negative integer exponent, scalar or array broadcastable with c

    Returns:
        Same shape as the broadcast of c and k; a float for scalar inputs
    """
    base = np.asarray(c, dtype=float)
    power = np.asarray(k)
    magnitude = np.abs(base)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_magnitude = np.log(magnitude)
        # k = 0 must give 1 even when c = 0, where k * log|c| would be nan.
        exponent = np.where(power == 0, 0.0, power * log_magnitude)
    sign = np.where((base < 0) & (power % 2 == 1), -1.0, 1.0)
    result = sign * np.exp(exponent)
    if np.ndim(result) == 0:
        return float(result)
    return result


def make_grid(
    mu_min: float, mu_max: float, mu_count: int, nu_min: float, nu_max: float, nu_count: int
) -> ParameterGrid:
    """
    Build a uniformly spaced grid with inclusive endpoints.

    Raises:
        ValueError: For non-finite bounds, counts below 2 or empty ranges
    """
    bounds = (mu_min, mu_max, nu_min, nu_max)
    if not all(math.isfinite(b) for b in bounds):
        msg = f"Grid bounds must be finite, got {bounds}"
        raise ValueError(msg)
    if mu_count < 2 or nu_count < 2:
        msg = f"Grid counts must be >= 2, got mu_count={mu_count}, nu_count={nu_count}"
        raise ValueError(msg)
    if mu_max <= mu_min or nu_max <= nu_min:
        msg = f"Grid ranges must satisfy max > min, got mu [{mu_min}, {mu_max}], nu [{nu_min}, {nu_max}]"
        raise ValueError(msg)

    return ParameterGrid.from_arrays(np.linspace(mu_min, mu_max, mu_count), np.linspace(nu_min, nu_max, nu_count))


def canonical_sign(vector: npt.NDArray[np.float64], tol: float = 1e-12) -> float:
    """
    Sign that makes the largest-magnitude component positive.

    Ties within tol are broken in favour of z, then y, then x.
    """
    magnitudes = np.abs(vector)
    largest = float(np.max(magnitudes))
    if largest == 0:
        return 1.0
    for index in CANONICAL_AXIS_ORDER:
        if magnitudes[index] >= largest - tol:
            return 1.0 if vector[index] > 0 else -1.0
    return 1.0


def canonical_vector_in_span(basis: npt.NDArray[np.float64], tol: float = 1e-8) -> npt.NDArray[np.float64]:
    """
    Deterministic unit vector inside the span of orthonormal columns.

    Projects e_z, then e_y, then e_x onto the subspace and returns the first
    projection that does not vanish.

    Args:
        basis: 3 x k matrix with orthonormal columns

    Returns:
        Unit 3-vector in the column span
    """
    for index in CANONICAL_AXIS_ORDER:
        axis = np.zeros(3)
        axis[index] = 1.0
        projection = basis @ (basis.T @ axis)
        norm = np.linalg.norm(projection)
        if norm > tol:
            return projection / norm
    return basis[:, 0] / np.linalg.norm(basis[:, 0])
