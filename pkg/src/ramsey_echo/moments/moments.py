"""
Closed-form moments of the echo protocol.

For the sequence T_{nu-mu} R_n(phi) T_mu |x> the slope of <S_m> at phi = 0 is
n^T M m and the variance is m^T Q m. Both matrices follow from nine scalars
n1..n4 and q0..q4, which collective and individual dephasing damp by known
factors. All functions accept scalar or array-valued mu and nu so landscapes
can be evaluated in one vectorized pass.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np
import numpy.typing as npt

from ramsey_echo.core.core import ArrayLike, NoiseModel, ProtocolPoint, stable_cos_pow

FloatArray = npt.NDArray[np.float64]


@dataclass(frozen=True)
class ScalarCoefficients:
    """The nine scalars that fix M, Q and the first moments (damping applied)."""

    n1: ArrayLike
    n2: ArrayLike
    n3: ArrayLike
    n4: ArrayLike
    q0: ArrayLike
    q1: ArrayLike
    q2: ArrayLike
    q3: ArrayLike
    q4: ArrayLike


@dataclass(frozen=True)
class MomentMatrices:
    """
    Signal matrix M, covariance matrix Q and first moments j of one protocol.

    Attributes:
        signal: 3x3 matrix with M_kl = i <[S_k(mu), S_l(nu)]>
        covariance: 3x3 symmetric spin covariance of S(nu)
        first_moments: (<S_x>, <S_y>, <S_z>) at the measurement
    """

    signal: FloatArray
    covariance: FloatArray
    first_moments: FloatArray


def coefficient_arrays(
    n_particles: int, mu: Union[float, FloatArray], nu: Union[float, FloatArray], noise: NoiseModel
) -> ScalarCoefficients:
    """
    Evaluate n1..n4 and q0..q4 on broadcast arrays of mu and nu.

    Args:
        n_particles: Particle number N >= 1
        mu: Initial twisting strength(s)
        nu: Excess inversion(s)
        noise: Collective and individual dephasing strengths

    Returns:
        ScalarCoefficients with array fields of the broadcast shape
    """
    mu_arr, nu_arr = np.broadcast_arrays(np.asarray(mu, dtype=float), np.asarray(nu, dtype=float))
    n = float(n_particles)
    pair = n * (n - 1)
    # N(N-1) vanishes for N = 1, so the exponent can be clamped there.
    k_pair = max(n_particles - 2, 0)
    k_single = n_particles - 1

    half_diff = (mu_arr - nu_arr) / 2
    half_sum = (mu_arr + nu_arr) / 2
    ones = np.ones_like(mu_arr)

    n1 = pair / 2 * np.sin(half_diff) * stable_cos_pow(np.cos(half_diff), k_pair)
    n2 = -pair / 2 * np.sin(half_diff) * stable_cos_pow(np.cos(half_sum), k_pair)
    n3 = -n / 2 * stable_cos_pow(np.cos(mu_arr / 2), k_single)
    n4 = n / 2 * stable_cos_pow(np.cos(nu_arr / 2), k_single)

    q0 = n / 2 * stable_cos_pow(np.cos(nu_arr / 2), k_single)
    q1 = n * (n + 1) / 4 * ones
    q2 = pair / 4 * stable_cos_pow(np.cos(nu_arr), k_pair)
    q3 = pair / 4 * np.sin(nu_arr / 2) * stable_cos_pow(np.cos(nu_arr / 2), k_pair)
    q4 = n / 4 * ones

    # Channel strengths of the two dephasing windows: |mu| before the signal, |nu - mu| after it.
    first = np.abs(mu_arr)
    second = np.abs(nu_arr - mu_arr)

    if noise.collective > 0:
        sigma = noise.collective
        q0 = q0 * np.exp(-sigma * (second + first) / 4)
        q2 = q2 * np.exp(-sigma * (second + first))
        q3 = q3 * np.exp(-sigma * (second + first) / 4)
        n1 = n1 * np.exp(-sigma * second / 4)
        n2 = n2 * np.exp(-sigma * (second / 4 + first))
        n3 = n3 * np.exp(-sigma * first / 4)
        n4 = n4 * np.exp(-sigma * (second + first) / 4)

    if noise.individual > 0:
        big_sigma = noise.individual
        single = np.exp(-big_sigma * (second + first))
        double = single * single
        q0 = q0 * single
        q2 = q2 * double
        q3 = q3 * single
        q1 = double * q1 + n / 2 * (1 - double)
        n1 = n1 * np.exp(-big_sigma * (second + 2 * first))
        n2 = n2 * np.exp(-big_sigma * (second + 2 * first))
        n3 = n3 * np.exp(-big_sigma * first)
        n4 = n4 * single

    return ScalarCoefficients(n1=n1, n2=n2, n3=n3, n4=n4, q0=q0, q1=q1, q2=q2, q3=q3, q4=q4)


def scalar_coefficients(point: ProtocolPoint) -> ScalarCoefficients:
    """Return the nine damped scalars of a single protocol point as floats."""
    arrays = coefficient_arrays(point.n_particles, point.mu, point.nu, point.noise)
    return ScalarCoefficients(
        n1=float(arrays.n1),
        n2=float(arrays.n2),
        n3=float(arrays.n3),
        n4=float(arrays.n4),
        q0=float(arrays.q0),
        q1=float(arrays.q1),
        q2=float(arrays.q2),
        q3=float(arrays.q3),
        q4=float(arrays.q4),
    )


def assemble(coefficients: ScalarCoefficients) -> tuple[FloatArray, FloatArray, FloatArray]:
    """
    Build stacks of M, Q and j from (possibly array valued) coefficients.

    Returns:
        (signal, covariance, first_moments) with trailing shapes (3, 3), (3, 3), (3,)
    """
    c = coefficients
    n1, n2, n3, n4 = (np.asarray(v, dtype=float) for v in (c.n1, c.n2, c.n3, c.n4))
    q0, q1, q2, q3, q4 = (np.asarray(v, dtype=float) for v in (c.q0, c.q1, c.q2, c.q3, c.q4))
    shape = np.broadcast_shapes(n1.shape, q0.shape, q1.shape)

    signal = np.zeros((*shape, 3, 3))
    signal[..., 0, 0] = (n1 + n2) / 2
    signal[..., 1, 1] = (n1 - n2) / 2
    signal[..., 1, 2] = n3
    signal[..., 2, 1] = n4

    covariance = np.zeros((*shape, 3, 3))
    covariance[..., 0, 0] = (q1 + q2) / 2 - q0 * q0
    covariance[..., 1, 1] = (q1 - q2) / 2
    covariance[..., 1, 2] = q3
    covariance[..., 2, 1] = q3
    covariance[..., 2, 2] = q4

    first_moments = np.zeros((*shape, 3))
    first_moments[..., 0] = q0

    return signal, covariance, first_moments


def moment_stack(
    n_particles: int, mu: Union[float, FloatArray], nu: Union[float, FloatArray], noise: NoiseModel
) -> tuple[FloatArray, FloatArray, FloatArray]:
    """Vectorized moment_matrices over broadcast arrays of mu and nu."""
    return assemble(coefficient_arrays(n_particles, mu, nu, noise))


def moment_matrices(point: ProtocolPoint) -> MomentMatrices:
    """
    Closed-form M, Q and j for one protocol point.

    Args:
        point: The protocol to evaluate

    Returns:
        MomentMatrices with 3x3 signal and covariance matrices
    """
    signal, covariance, first_moments = moment_stack(point.n_particles, point.mu, point.nu, point.noise)
    return MomentMatrices(signal=signal, covariance=covariance, first_moments=first_moments)
