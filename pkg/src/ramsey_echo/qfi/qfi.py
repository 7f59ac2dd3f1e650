"""
Quantum Fisher information of twisted (and collectively dephased) states.

The QFI matrix over the rotation generators S_x, S_y, S_z bounds the SNR of
every echo protocol that starts from the same prepared state.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Optional

import numpy as np
import numpy.typing as npt

from ramsey_echo.core.core import Direction, NoiseModel, canonical_sign, canonical_vector_in_span, stable_cos_pow
from ramsey_echo.logger import logging_helper
from ramsey_echo.optimizer import landscape
from ramsey_echo.oracle import oracle
from ramsey_echo.oracle.oracle import DickeDensity

logger = logging_helper.get_logger(__name__)

FloatArray = npt.NDArray[np.float64]

EIGEN_TOL = 1e-14
DEGENERACY_REL_TOL = 1e-9


@dataclass(frozen=True)
class QfiResult:
    """
    Largest QFI over rotation axes.

    Attributes:
        value: max_n F_Q[rho, S_n]
        axis: Rotation axis reaching it
        matrix: 3x3 QFI matrix over S_x, S_y, S_z
    """

    value: float
    axis: Direction
    matrix: FloatArray


@dataclass(frozen=True)
class QcrbEntry:
    mu: float
    snr_sq: float
    qfi: float
    violation: float


@dataclass(frozen=True)
class QcrbReport:
    """Largest relative excess (SNR^2 - F_Q) / F_Q over all mu, and the per-mu detail."""

    max_violation: float
    per_mu: tuple[QcrbEntry, ...]


def qfi_closed_form_max(mu: float, n_particles: int) -> float:
    """
    Largest QFI of the noiseless state T_mu |x> over all rotation axes.

    Raises:
        ValueError: If N < 2
    """
    if n_particles < 2:
        msg = f"Closed-form QFI needs N >= 2, got {n_particles}"
        raise ValueError(msg)

    n = float(n_particles)
    a = 1 - stable_cos_pow(np.cos(mu), n_particles - 2)
    b = 4 * np.sin(mu / 2) * stable_cos_pow(np.cos(mu / 2), n_particles - 2)
    in_plane = n + n * (n - 1) / 4 * (a + np.sqrt(a * a + b * b))
    along_polarization = n * n * (1 - stable_cos_pow(np.cos(mu / 2), 2 * n_particles - 2)) - n * (n - 1) * a / 2
    return float(max(in_plane, along_polarization))


def dephased_initial_density(mu: float, sigma: float, n_particles: int) -> DickeDensity:
    """T_mu |x><x| T_mu^dagger after collective dephasing of strength sigma |mu|."""
    prepared = oracle.apply_oat(oracle.x_state(n_particles).density(), mu)
    return oracle.collective_dephase(prepared, sigma, mu)


def qfi_matrix(rho: DickeDensity, operators: Optional[Sequence[npt.NDArray[np.complex128]]] = None) -> FloatArray:
    """
    QFI matrix from the spectral decomposition of rho.

    F_kl = 2 sum (p - p')^2 / (p + p') Re(<k'|A_k|k><k|A_l|k'>), skipping
    pairs whose weight sum is below 1e-14 of the largest eigenvalue.

    Args:
        rho: Density matrix
        operators: Generators; the collective spin components by default

    Returns:
        Symmetric len(operators) x len(operators) matrix
    """
    if operators is None:
        operators = oracle.spin_operators(rho.n_particles).components()

    probabilities, vectors = np.linalg.eigh(rho.matrix)
    probabilities = np.clip(probabilities, 0.0, None)
    sums = probabilities[:, None] + probabilities[None, :]
    keep = sums > EIGEN_TOL * float(np.max(probabilities))
    weights = np.where(keep, (probabilities[:, None] - probabilities[None, :]) ** 2 / np.where(keep, sums, 1.0), 0.0)

    in_eigenbasis = [vectors.conj().T @ op @ vectors for op in operators]
    size = len(in_eigenbasis)
    matrix = np.zeros((size, size))
    for k in range(size):
        for l_index in range(k, size):
            value = 2 * float(np.real(np.sum(weights * in_eigenbasis[k] * in_eigenbasis[l_index].conj())))
            matrix[k, l_index] = matrix[l_index, k] = value
    return matrix


def _best_axis(matrix: FloatArray) -> tuple[float, Direction]:
    eigenvalues, eigenvectors = np.linalg.eigh(matrix)
    top = float(eigenvalues[-1])
    degenerate = eigenvalues >= top - DEGENERACY_REL_TOL * max(abs(top), 1.0)
    if np.count_nonzero(degenerate) > 1:
        axis = canonical_vector_in_span(eigenvectors[:, degenerate])
    else:
        axis = eigenvectors[:, -1]
    return top, Direction.from_vector(canonical_sign(axis) * axis)


def qfi_max(mu: float, sigma: float, n_particles: int) -> QfiResult:
    """Largest QFI and its axis for the collectively dephased twisted state."""
    matrix = qfi_matrix(dephased_initial_density(mu, sigma, n_particles))
    value, axis = _best_axis(matrix)
    return QfiResult(value=value, axis=axis, matrix=matrix)


def qcrb_check(
    n_particles: int,
    noise: NoiseModel,
    mu_values: Sequence[float],
    nu_search: Optional[npt.ArrayLike] = None,
) -> QcrbReport:
    """
    Compare the nu-optimized SNR^2 with the QFI of the prepared state.

    Raises:
        ValueError: If individual dephasing is requested
    """
    if noise.individual > 0:
        msg = "The Cramer-Rao check covers collective dephasing only"
        raise ValueError(msg)

    records = landscape.nu_optimized_slice(mu_values, n_particles, noise, nu_search)
    entries = []
    for record in records:
        snr_sq = record.snr_sq_over_n * n_particles
        qfi = qfi_max(record.mu, noise.collective, n_particles).value
        violation = (snr_sq - qfi) / qfi if qfi > 0 else 0.0
        entries.append(QcrbEntry(mu=record.mu, snr_sq=snr_sq, qfi=qfi, violation=violation))

    max_violation = max(entry.violation for entry in entries)
    logger.info(f"Cramer-Rao check N={n_particles} {noise}: max violation {max_violation:.3e}")
    return QcrbReport(max_violation=max_violation, per_mu=tuple(entries))
