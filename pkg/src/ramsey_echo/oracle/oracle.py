"""
Brute-force ground truth for echo protocols.

States are evolved exactly: in the Dicke basis when the noise is collective,
in the 2^N product space when individual dephasing is present. The twisting
unitaries and both dephasing channels act elementwise on density matrices in
the S_z eigenbasis, so they commute and are applied as one combined factor.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal, Union

import numpy as np
import numpy.typing as npt
from scipy.linalg import null_space
from scipy.special import gammaln, xlogy

from ramsey_echo.core.core import Direction, NoiseModel, ProtocolPoint
from ramsey_echo.logger import logging_helper
from ramsey_echo.moments import moments
from ramsey_echo.oracle import spaces
from ramsey_echo.oracle.spaces import SpinOperators, SpinSpace

logger = logging_helper.get_logger(__name__)

ComplexArray = npt.NDArray[np.complex128]
SpaceChoice = Literal["auto", "dicke", "product"]

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
VARIANCE_REL_TOL = 1e-12
FINITE_DIFFERENCE_STEP = 1e-5


@dataclass(frozen=True)
class DickeVector:
    """Pure state in the Dicke basis, index i = m + N/2."""

    amplitudes: ComplexArray

    def __post_init__(self):
        norm = float(np.linalg.norm(self.amplitudes))
        if self.amplitudes.ndim != 1 or self.amplitudes.size < 2:
            msg = f"Dicke vector needs N+1 >= 2 amplitudes, got shape {self.amplitudes.shape}"
            raise ValueError(msg)
        if abs(norm - 1.0) > NORM_TOL:
            msg = f"Dicke vector must be normalized, got norm {norm}"
            raise ValueError(msg)

    @property
    def n_particles(self) -> int:
        return self.amplitudes.size - 1

    def density(self) -> "DickeDensity":
        return DickeDensity(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DickeDensity:
    """Density matrix in the Dicke basis."""

    matrix: ComplexArray

    def __post_init__(self):
        rows, cols = self.matrix.shape
        if rows != cols or rows < 2:
            msg = f"Dicke density must be square with N+1 >= 2 rows, got {self.matrix.shape}"
            raise ValueError(msg)
        if np.max(np.abs(self.matrix - self.matrix.conj().T)) > HERMITIAN_TOL:
            msg = "Dicke density must be Hermitian"
            raise ValueError(msg)
        trace = complex(np.trace(self.matrix))
        if abs(trace - 1.0) > NORM_TOL:
            msg = f"Dicke density must have unit trace, got {trace}"
            raise ValueError(msg)

    @property
    def n_particles(self) -> int:
        return self.matrix.shape[0] - 1

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))


DickeState = Union[DickeVector, DickeDensity]


def _hermitian(matrix: ComplexArray) -> ComplexArray:
    return (matrix + matrix.conj().T) / 2


def spin_operators(n_particles: int) -> SpinOperators:
    """Collective spin matrices of the Dicke space (shared per N)."""
    return spaces.dicke(n_particles).operators


def coherent_state(theta: float, phi: float, n_particles: int) -> DickeVector:
    """
    Coherent spin state |theta, phi> in the Dicke basis.

    c_m = sqrt(C(N, k)) sin^k(theta/2) cos^(N-k)(theta/2) exp(-i k phi) with
    k = N/2 + m; binomials and powers are combined in log space.
    """
    if n_particles < 1:
        msg = f"Particle number must be >= 1, got {n_particles}"
        raise ValueError(msg)

    k = np.arange(n_particles + 1)
    sine = np.sin(theta / 2)
    cosine = np.cos(theta / 2)
    log_binomial = 0.5 * (gammaln(n_particles + 1) - gammaln(k + 1) - gammaln(n_particles - k + 1))
    log_magnitude = log_binomial + xlogy(k, abs(sine)) + xlogy(n_particles - k, abs(cosine))
    sign = np.where((sine < 0) & (k % 2 == 1), -1.0, 1.0) * np.where(
        (cosine < 0) & ((n_particles - k) % 2 == 1), -1.0, 1.0
    )
    amplitudes = sign * np.exp(log_magnitude) * np.exp(-1j * k * phi)
    return DickeVector(amplitudes / np.linalg.norm(amplitudes))


def x_state(n_particles: int) -> DickeVector:
    """The Ramsey initial state |x>, polarized along +x."""
    return coherent_state(np.pi / 2, 0.0, n_particles)


def apply_oat(state: DickeState, mu: float) -> DickeState:
    """Apply T_mu = exp(-i mu S_z^2 / 2)."""
    phases = spaces.dicke(state.n_particles).oat_phases(mu)
    if isinstance(state, DickeVector):
        return DickeVector(phases * state.amplitudes)
    return DickeDensity(_hermitian(phases[:, None] * state.matrix * phases.conj()[None, :]))


def collective_dephase(rho: DickeDensity, sigma: float, mu: float) -> DickeDensity:
    """Collective dephasing channel of strength sigma |mu| on a Dicke density."""
    if sigma < 0:
        msg = f"Dephasing strength must be >= 0, got {sigma}"
        raise ValueError(msg)
    if sigma == 0 or mu == 0:
        return rho
    factor = spaces.dicke(rho.n_particles).collective_factor(sigma, mu)
    return DickeDensity(rho.matrix * factor)


def rotate(state: DickeState, axis: Direction, angle: float) -> DickeState:
    """Apply R_n(angle) = exp(-i angle S_n)."""
    unitary = spaces.dicke(state.n_particles).rotation(axis, angle)
    if isinstance(state, DickeVector):
        return DickeVector(unitary @ state.amplitudes)
    return DickeDensity(_hermitian(unitary @ state.matrix @ unitary.conj().T))


def _twist(space: SpinSpace, operator: ComplexArray, angle: float, noise: NoiseModel) -> ComplexArray:
    """Twisting by `angle` followed by the dephasing accumulated over |angle|.

    Linear in `operator`, so it also carries commutators through the channel.
    """
    phases = space.oat_phases(angle)
    result = phases[:, None] * operator * phases.conj()[None, :]
    if noise.collective > 0:
        result = result * space.collective_factor(noise.collective, angle)
    if noise.individual > 0:
        result = result * space.individual_factor(noise.individual, angle)
    return result


def _select_space(point: ProtocolPoint, space: SpaceChoice) -> SpinSpace:
    if space == "auto":
        space = "product" if point.noise.individual > 0 else "dicke"
    if space == "dicke":
        if point.noise.individual > 0:
            msg = "Individual dephasing leaves the Dicke space; use the product-space path"
            raise ValueError(msg)
        return spaces.dicke(point.n_particles)
    if space == "product":
        return spaces.product(point.n_particles)
    msg = f"Unknown space: {space}"
    raise ValueError(msg)


def _prepared(space: SpinSpace, point: ProtocolPoint) -> ComplexArray:
    initial = np.outer(space.x_state, space.x_state.conj())
    return _twist(space, initial, point.mu, point.noise)


def _evolve(space: SpinSpace, point: ProtocolPoint, phi: float, axis: Direction) -> ComplexArray:
    prepared = _prepared(space, point)
    unitary = space.rotation(axis, phi)
    rotated = unitary @ prepared @ unitary.conj().T
    return _hermitian(_twist(space, rotated, point.nu - point.mu, point.noise))


def protocol_density(point: ProtocolPoint, phi: float, axis: Direction) -> DickeDensity:
    """
    Final density of T_{nu-mu} R_n(phi) T_mu |x> with collective dephasing.

    Raises:
        ValueError: If individual dephasing is present
    """
    if point.noise.individual > 0:
        msg = "protocol_density covers collective noise only; use full_space_protocol for individual dephasing"
        raise ValueError(msg)
    return DickeDensity(_evolve(spaces.dicke(point.n_particles), point, phi, axis))


def full_space_protocol(point: ProtocolPoint, phi: float, axis: Direction) -> ComplexArray:
    """
    Final 2^N x 2^N density of the protocol with both dephasing channels.

    Raises:
        ValueError: If N exceeds the product-space limit
    """
    return _evolve(spaces.product(point.n_particles), point, phi, axis)


def embed_dicke(rho: DickeDensity) -> ComplexArray:
    """Map a Dicke density into the symmetric subspace of the product space."""
    embedding = spaces.dicke_embedding(rho.n_particles)
    return embedding @ rho.matrix @ embedding.conj().T


def _expectation(operator: ComplexArray, rho: ComplexArray) -> float:
    return float(np.real(np.sum(operator.T * rho)))


def direct_sensitivity(
    point: ProtocolPoint, signal_axis: Direction, measurement_axis: Direction, space: SpaceChoice = "auto"
) -> float:
    """
    Inverse phase deviation from exact evolution.

    The slope at phi = 0 is tr(S_m D[-i [S_n, rho_prep]]), with D the
    linear second twist and its dephasing; no finite differencing.

    Args:
        point: The protocol
        signal_axis: Signal rotation axis n
        measurement_axis: Measurement axis m
        space: "dicke", "product" or "auto" (product only for individual noise)

    Returns:
        |slope| / sqrt(variance)

    Raises:
        ValueError: If the measured variance vanishes (degenerate measurement)
    """
    spin_space = _select_space(point, space)
    prepared = _prepared(spin_space, point)
    generator = spin_space.operators.along(signal_axis)
    measured = spin_space.operators.along(measurement_axis)

    commutator = -1j * (generator @ prepared - prepared @ generator)
    slope = _expectation(measured, _twist(spin_space, commutator, point.nu - point.mu, point.noise))
    final = _twist(spin_space, prepared, point.nu - point.mu, point.noise)
    mean = _expectation(measured, final)
    variance = _expectation(measured @ measured, final) - mean**2

    if variance <= VARIANCE_REL_TOL * point.n_particles**2:
        msg = f"degenerate measurement: variance {variance:.3e} along {measurement_axis.components}"
        raise ValueError(msg)
    return abs(slope) / float(np.sqrt(variance))


def finite_difference_slope(
    point: ProtocolPoint,
    signal_axis: Direction,
    measurement_axis: Direction,
    step: float = FINITE_DIFFERENCE_STEP,
    space: SpaceChoice = "auto",
) -> float:
    """Central-difference slope of <S_m> at phi = 0, Richardson extrapolated."""
    spin_space = _select_space(point, space)
    prepared = _prepared(spin_space, point)
    measured = spin_space.operators.along(measurement_axis)

    def signal(phi: float) -> float:
        unitary = spin_space.rotation(signal_axis, phi)
        rotated = unitary @ prepared @ unitary.conj().T
        return _expectation(measured, _twist(spin_space, rotated, point.nu - point.mu, point.noise))

    def central(h: float) -> float:
        return (signal(h) - signal(-h)) / (2 * h)

    return (4 * central(step / 2) - central(step)) / 3


def oracle_moments(point: ProtocolPoint, space: SpaceChoice = "auto") -> moments.MomentMatrices:
    """M, Q and j of a protocol from expectation values of the evolved state."""
    spin_space = _select_space(point, space)
    prepared = _prepared(spin_space, point)
    final = _twist(spin_space, prepared, point.nu - point.mu, point.noise)
    components = spin_space.operators.components()

    first = np.array([_expectation(op, final) for op in components])
    covariance = np.zeros((3, 3))
    signal = np.zeros((3, 3))
    for k, op_k in enumerate(components):
        carried = _twist(spin_space, -1j * (op_k @ prepared - prepared @ op_k), point.nu - point.mu, point.noise)
        for l_index, op_l in enumerate(components):
            anticommutator = (op_k @ op_l + op_l @ op_k) / 2
            covariance[k, l_index] = _expectation(anticommutator, final) - first[k] * first[l_index]
            signal[k, l_index] = _expectation(op_l, carried)

    return moments.MomentMatrices(signal=signal, covariance=covariance, first_moments=first)


def verify_moment_matrices(point: ProtocolPoint) -> float:
    """
    Largest deviation between closed-form and oracle moments, divided by N^2.

    Uses the Dicke space without individual dephasing and the product space
    (N <= 10) with it.
    """
    analytic = moments.moment_matrices(point)
    direct = oracle_moments(point)
    deviation = max(
        float(np.max(np.abs(analytic.signal - direct.signal))),
        float(np.max(np.abs(analytic.covariance - direct.covariance))),
        float(np.max(np.abs(analytic.first_moments - direct.first_moments))),
    )
    logger.debug(f"Moment deviation at {point}: {deviation:.3e}")
    return deviation / point.n_particles**2


def signal_curve(
    point: ProtocolPoint,
    signal_axis: Direction,
    measurement_axis: Direction,
    phi_values: Sequence[float],
    space: SpaceChoice = "auto",
) -> list[float]:
    """<S_m>(phi) of the protocol for each phi."""
    spin_space = _select_space(point, space)
    measured = spin_space.operators.along(measurement_axis)
    return [_expectation(measured, _evolve(spin_space, point, float(phi), signal_axis)) for phi in phi_values]


def channel_expectation(
    rho: ComplexArray, operator: ComplexArray, n_particles: int, noise: NoiseModel, strength: float
) -> complex:
    """
    <X> after the dephasing channels of strength |strength>, without twisting.

    The space is inferred from the matrix size (N+1 for Dicke, 2^N for product).
    """
    dimension = rho.shape[0]
    if dimension == n_particles + 1:
        if noise.individual > 0:
            msg = "Individual dephasing needs a product-space density"
            raise ValueError(msg)
        space = spaces.dicke(n_particles)
    elif dimension == 2**n_particles:
        space = spaces.product(n_particles)
    else:
        msg = f"Density of size {dimension} matches neither space for N={n_particles}"
        raise ValueError(msg)

    channel = np.ones_like(rho)
    if noise.collective > 0:
        channel = channel * space.collective_factor(noise.collective, strength)
    if noise.individual > 0:
        channel = channel * space.individual_factor(noise.individual, strength)
    return complex(np.sum(operator.T * (rho * channel)))


def wineland_parameter(n_particles: int, mu: float, noise: NoiseModel) -> float:
    """
    N * min perpendicular variance / |<S>|^2 of the twisted, dephased state.

    Raises:
        ValueError: If the mean spin vanishes
    """
    point = ProtocolPoint(n_particles, mu, mu, noise)
    matrices = oracle_moments(point)
    mean = matrices.first_moments
    length_sq = float(mean @ mean)
    if length_sq <= NORM_TOL * n_particles**2:
        msg = f"No mean spin left at mu={mu}; the squeezing parameter diverges"
        raise ValueError(msg)
    plane = null_space(mean[None, :])
    perpendicular = plane.T @ matrices.covariance @ plane
    return n_particles * float(np.linalg.eigvalsh(perpendicular)[0]) / length_sq
