"""
Spherical Wigner functions of Dicke-space operators.

An operator A on the spin-N/2 space is expanded in the orthonormal multipole
basis T_KQ, A_KQ = tr(A T_KQ^dagger), and mapped to the sphere as
W(theta, phi) = sum A_KQ Y_KQ(theta, phi). With this normalization the
sphere integral of W_A conj(W_B) equals tr(A B^dagger), which is how
expectation values are read off as field overlaps.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Union

import numpy as np
import numpy.typing as npt
from scipy.special import sph_harm_y
from sympy import Rational
from sympy.physics.wigner import clebsch_gordan as sympy_clebsch_gordan

from ramsey_echo.core.core import Direction, ProtocolPoint
from ramsey_echo.logger import logging_helper
from ramsey_echo.oracle import oracle, spaces
from ramsey_echo.oracle.oracle import DickeDensity, DickeVector

logger = logging_helper.get_logger(__name__)

ComplexArray = npt.NDArray[np.complex128]
FloatArray = npt.NDArray[np.float64]
OperatorSource = Union[DickeDensity, DickeVector, ComplexArray]

HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class WignerField:
    """
    Multipole coefficients and optional samples of a spherical Wigner function.

    Attributes:
        n_particles: N of the Dicke space the operator lives on
        multipoles: A_KQ at [K, Q + N], zero where |Q| > K
        samples: Field on the (theta, phi) grid, real for Hermitian operators
        theta_nodes: Gauss-Legendre polar angles, increasing
        phi_nodes: Uniform azimuths starting at 0
        theta_weights: Quadrature weights in cos(theta)
    """

    n_particles: int
    multipoles: ComplexArray
    samples: Optional[npt.NDArray] = None
    theta_nodes: Optional[FloatArray] = None
    phi_nodes: Optional[FloatArray] = None
    theta_weights: Optional[FloatArray] = None


@dataclass(frozen=True)
class OutMechanismReport:
    """Half-and-half split of a double-inversion protocol into state and measurement fields."""

    state_field: WignerField
    measurement_field: WignerField
    overlap: float
    oracle_expectation: float


def _is_valid_pair(j: Fraction, m: Fraction) -> bool:
    if (2 * j).denominator != 1 or (2 * m).denominator != 1 or (j - m).denominator != 1:
        return False
    return j >= 0 and abs(m) <= j


@lru_cache(maxsize=None)
def _clebsch_gordan_exact(j1: Fraction, m1: Fraction, j2: Fraction, m2: Fraction, j: Fraction, m: Fraction) -> float:
    if not all(_is_valid_pair(a, b) for a, b in ((j1, m1), (j2, m2), (j, m))):
        return 0.0
    if m1 + m2 != m or not abs(j1 - j2) <= j <= j1 + j2 or (j1 + j2 + j).denominator != 1:
        return 0.0
    args = (j1, j2, j, m1, m2, m)
    return float(sympy_clebsch_gordan(*(Rational(a.numerator, a.denominator) for a in args)))


def clebsch_gordan(j1: float, m1: float, j2: float, m2: float, j: float, m: float) -> float:
    """
    Condon-Shortley coefficient <j1 m1; j2 m2 | j m>.

    Arguments may be integers or half-integers; combinations violating the
    selection rules give 0.
    """
    values = tuple(Fraction(round(2 * value), 2) for value in (j1, m1, j2, m2, j, m))
    return _clebsch_gordan_exact(*values)


@lru_cache(maxsize=8)
def _multipole_diagonals(n_particles: int) -> dict[tuple[int, int], FloatArray]:
    """
    Nonzero diagonal of every T_KQ.

    T_KQ only couples m to m' = m + Q; entry i of the array is the element
    ordered as np.diagonal(T_KQ, offset=-Q).
    """
    spin = Fraction(n_particles, 2)
    dimension = n_particles + 1
    diagonals = {}
    for rank in range(n_particles + 1):
        norm = np.sqrt((2 * rank + 1) / dimension)
        for q in range(-rank, rank + 1):
            length = dimension - abs(q)
            start = max(-q, 0)
            values = np.empty(length)
            for i in range(length):
                m = Fraction(start + i) - spin
                values[i] = norm * _clebsch_gordan_exact(spin, m, Fraction(rank), Fraction(q), spin, m + q)
            diagonals[(rank, q)] = values
    logger.debug(f"Built multipole basis for N={n_particles}")
    return diagonals


def multipole_operator(rank: int, q: int, n_particles: int) -> ComplexArray:
    """
    Orthonormal multipole T_KQ on the Dicke space.

    Raises:
        ValueError: Unless 0 <= K <= N and |Q| <= K
    """
    if not 0 <= rank <= n_particles or abs(q) > rank:
        msg = f"Multipole (K={rank}, Q={q}) out of range for N={n_particles}"
        raise ValueError(msg)

    dimension = n_particles + 1
    operator = np.zeros((dimension, dimension), dtype=complex)
    diagonal = _multipole_diagonals(n_particles)[(rank, q)]
    cols = np.arange(diagonal.size) + max(-q, 0)
    operator[cols + q, cols] = diagonal
    return operator


def _as_operator(source: OperatorSource) -> ComplexArray:
    if isinstance(source, DickeVector):
        return source.density().matrix
    if isinstance(source, DickeDensity):
        return source.matrix
    matrix = np.asarray(source, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] < 2:
        msg = f"Operator must be a square matrix of size N+1 >= 2, got shape {matrix.shape}"
        raise ValueError(msg)
    return matrix


def multipole_coefficients(operator: ComplexArray) -> ComplexArray:
    """A_KQ = tr(A T_KQ^dagger), stored at [K, Q + N]."""
    n_particles = operator.shape[0] - 1
    coefficients = np.zeros((n_particles + 1, 2 * n_particles + 1), dtype=complex)
    for (rank, q), diagonal in _multipole_diagonals(n_particles).items():
        coefficients[rank, q + n_particles] = np.sum(np.diagonal(operator, offset=-q) * diagonal)
    return coefficients


def _symmetrize(coefficients: ComplexArray, n_particles: int) -> ComplexArray:
    """Impose A_{K,-Q} = (-1)^Q conj(A_KQ), exact for Hermitian operators."""
    q = np.arange(-n_particles, n_particles + 1)
    parity = np.where(q % 2 == 0, 1.0, -1.0)
    mirrored = parity[None, :] * np.conj(coefficients[:, ::-1])
    return (coefficients + mirrored) / 2


def sphere_grid(theta_count: int, phi_count: int) -> tuple[FloatArray, FloatArray, FloatArray]:
    """Gauss-Legendre theta nodes (increasing) with weights, and uniform phi nodes."""
    x, weights = np.polynomial.legendre.leggauss(theta_count)
    theta = np.arccos(x[::-1])
    phi = 2 * np.pi * np.arange(phi_count) / phi_count
    return theta, phi, weights[::-1]


def sample_field(coefficients: ComplexArray, theta: FloatArray, phi: FloatArray) -> ComplexArray:
    """W(theta, phi) = sum_KQ A_KQ Y_KQ(theta, phi) on the outer grid."""
    n_particles = coefficients.shape[0] - 1
    per_q = np.zeros((2 * n_particles + 1, theta.size), dtype=complex)
    for rank in range(n_particles + 1):
        for q in range(-rank, rank + 1):
            per_q[q + n_particles] += coefficients[rank, q + n_particles] * sph_harm_y(rank, q, theta, 0.0)
    azimuthal = np.exp(1j * np.outer(np.arange(-n_particles, n_particles + 1), phi))
    return per_q.T @ azimuthal


def wigner_field(source: OperatorSource, theta_count: int = 0, phi_count: int = 0) -> WignerField:
    """
    Wigner function of a Dicke-space operator.

    Args:
        source: Operator matrix, DickeDensity or DickeVector (taken as |psi><psi|)
        theta_count: Gauss-Legendre polar nodes; 0 for coefficients only
        phi_count: Uniform azimuthal nodes; 0 for coefficients only

    Returns:
        WignerField; samples are real for Hermitian sources
    """
    if theta_count < 0 or phi_count < 0 or (theta_count == 0) != (phi_count == 0):
        msg = f"Sample counts must be both positive or both zero, got {theta_count}x{phi_count}"
        raise ValueError(msg)

    operator = _as_operator(source)
    n_particles = operator.shape[0] - 1
    coefficients = multipole_coefficients(operator)
    hermitian = bool(np.max(np.abs(operator - operator.conj().T)) <= HERMITIAN_TOL)
    if hermitian:
        coefficients = _symmetrize(coefficients, n_particles)

    if theta_count == 0:
        return WignerField(n_particles=n_particles, multipoles=coefficients)

    theta, phi, weights = sphere_grid(theta_count, phi_count)
    samples = sample_field(coefficients, theta, phi)
    return WignerField(
        n_particles=n_particles,
        multipoles=coefficients,
        samples=np.real(samples) if hermitian else samples,
        theta_nodes=theta,
        phi_nodes=phi,
        theta_weights=weights,
    )


def _check_same_space(first: WignerField, second: WignerField) -> None:
    if first.n_particles != second.n_particles:
        msg = f"Fields belong to different spaces: N={first.n_particles} and N={second.n_particles}"
        raise ValueError(msg)


def sphere_overlap(first: WignerField, second: WignerField) -> float:
    """Sphere integral of W_A conj(W_B) from the coefficients; equals Re tr(A B^dagger)."""
    _check_same_space(first, second)
    return float(np.real(np.sum(first.multipoles * np.conj(second.multipoles))))


def quadrature_overlap(first: WignerField, second: WignerField) -> float:
    """
    The same overlap from the sampled fields.

    Exact once the grid has at least N+1 theta and 2N+1 phi nodes.
    """
    _check_same_space(first, second)
    if first.samples is None or second.samples is None:
        msg = "Quadrature overlap needs sampled fields"
        raise ValueError(msg)
    if first.samples.shape != second.samples.shape or first.theta_weights is None or first.phi_nodes is None:
        msg = "Quadrature overlap needs fields sampled on the same grid"
        raise ValueError(msg)

    phi_weight = 2 * np.pi / first.phi_nodes.size
    integrand = first.samples * np.conj(second.samples)
    return float(np.real(phi_weight * np.sum(first.theta_weights[:, None] * integrand)))


def out_mechanism_report(
    n_particles: int, mu: float, phi: float, theta_count: int = 0, phi_count: int = 0
) -> OutMechanismReport:
    """
    Split the double-inversion protocol (nu = -mu) into state and measurement.

    The state is T_{-mu} R_y(phi) T_mu |x> and the measurement operator is
    T_mu S_y T_mu^dagger, so their overlap equals <S_y> of the full protocol.

    Args:
        n_particles: N >= 2
        mu: Twisting strength
        phi: Signal rotation about y
        theta_count: Polar sample count; 0 picks 2N+1
        phi_count: Azimuthal sample count; 0 picks 4N+2

    Raises:
        ValueError: If N < 2
    """
    if n_particles < 2:
        msg = f"The mechanism report needs N >= 2, got {n_particles}"
        raise ValueError(msg)

    y_axis = Direction.axis("y")
    state = oracle.apply_oat(oracle.rotate(oracle.apply_oat(oracle.x_state(n_particles), mu), y_axis, phi), -mu)
    phases = spaces.dicke(n_particles).oat_phases(mu)
    measurement = phases[:, None] * oracle.spin_operators(n_particles).sy * phases.conj()[None, :]

    theta_count = theta_count or 2 * n_particles + 1
    phi_count = phi_count or 4 * n_particles + 2
    state_field = wigner_field(state, theta_count, phi_count)
    measurement_field = wigner_field(measurement, theta_count, phi_count)
    expectation = oracle.signal_curve(ProtocolPoint(n_particles, mu, -mu), y_axis, y_axis, [phi])[0]

    return OutMechanismReport(
        state_field=state_field,
        measurement_field=measurement_field,
        overlap=sphere_overlap(state_field, measurement_field),
        oracle_expectation=expectation,
    )
