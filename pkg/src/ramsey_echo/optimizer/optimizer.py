"""
Geometric optimization of signal and measurement axes.

The inverse phase deviation of a protocol with signal axis n and measurement
axis m is n^T M m / sqrt(m^T Q m). Substituting v = Q^{1/2} m turns the
maximization over both axes into the largest singular value of M Q^{-1/2}.
Everything here works on stacks of 3x3 matrices so that landscapes are a
single batched LAPACK call.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np
import numpy.typing as npt

from ramsey_echo.core.core import Direction, NoiseModel, ProtocolPoint, canonical_vector_in_span
from ramsey_echo.moments import moments

FloatArray = npt.NDArray[np.float64]

NULL_REL_TOL = 1e-12
DEGENERACY_REL_TOL = 1e-10
SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class OptimizedSensitivity:
    """
    Maximal SNR of a protocol and the axes that reach it.

    Attributes:
        snr: Inverse phase deviation, the largest singular value of M Q^{-1/2}
        signal_axis: Optimal signal rotation axis n
        measurement_axis: Optimal measurement axis m
        singular_values: All three singular values, descending
        rank_q: Number of covariance eigenvalues kept by the null cut
    """

    snr: float
    signal_axis: Direction
    measurement_axis: Direction
    singular_values: tuple[float, float, float]
    rank_q: int


@dataclass(frozen=True)
class OptimizedStack:
    """Array form of OptimizedSensitivity for a batch of protocols."""

    snr: FloatArray
    signal_axes: FloatArray
    measurement_axes: FloatArray
    singular_values: FloatArray
    rank_q: npt.NDArray[np.int_]


def _inv_sqrt_stack(covariance: FloatArray, rel_tol: float) -> tuple[FloatArray, FloatArray, FloatArray]:
    """Pseudo inverse square roots of a stack of PSD matrices.

    Returns the roots, a per-eigenvalue null flag and the eigenvectors.
    """
    symmetric = (covariance + np.swapaxes(covariance, -1, -2)) / 2
    eigenvalues, eigenvectors = np.linalg.eigh(symmetric)
    largest = np.maximum(eigenvalues[..., -1:], 0.0)
    if np.any(eigenvalues < -rel_tol * largest):
        worst = float(np.min(eigenvalues / np.where(largest > 0, largest, 1.0)))
        msg = f"Covariance matrix is not positive semi-definite (relative eigenvalue {worst:.3e})"
        raise ValueError(msg)

    null = eigenvalues <= rel_tol * largest
    inverse_roots = np.where(null, 0.0, 1.0 / np.sqrt(np.where(null, 1.0, eigenvalues)))
    roots = (eigenvectors * inverse_roots[..., None, :]) @ np.swapaxes(eigenvectors, -1, -2)
    return roots, null, eigenvectors


def inv_sqrt_psd(covariance: npt.ArrayLike, rel_tol: float = NULL_REL_TOL) -> tuple[FloatArray, npt.NDArray[np.bool_]]:
    """
    Pseudo inverse square root of a symmetric positive semi-definite 3x3 matrix.

    Eigenvalues at or below rel_tol times the largest are treated as exact
    nulls and dropped, so R Q R is the projector onto the kept subspace.

    Args:
        covariance: Symmetric PSD 3x3 matrix
        rel_tol: Relative cut below which eigenvalues count as zero

    Returns:
        (R, null_mask): R is symmetric; null_mask[k] flags coordinate axis k
        as lying in the dropped subspace

    Raises:
        ValueError: If the matrix is not 3x3, not symmetric or not PSD
    """
    q = np.asarray(covariance, dtype=float)
    if q.shape != (3, 3):
        msg = f"Expected a 3x3 matrix, got shape {q.shape}"
        raise ValueError(msg)
    if np.max(np.abs(q - q.T)) > SYMMETRY_TOL:
        msg = "Covariance matrix is not symmetric"
        raise ValueError(msg)

    roots, null, eigenvectors = _inv_sqrt_stack(q, rel_tol)
    null_basis = eigenvectors[:, null]
    weight_in_null = np.sum(null_basis * null_basis, axis=1)
    return roots, weight_in_null > 0.5


def _canonical_signs(axes: FloatArray) -> FloatArray:
    """Per-row sign making the largest component positive (ties prefer z, y, x)."""
    magnitudes = np.abs(axes)
    largest = np.max(magnitudes, axis=-1, keepdims=True)
    candidates = magnitudes >= largest - 1e-12
    index = np.where(candidates[..., 2], 2, np.where(candidates[..., 1], 1, 0))
    component = np.take_along_axis(axes, index[..., None], axis=-1)[..., 0]
    return np.where(component < 0, -1.0, 1.0)


def optimize_stack(signal: npt.ArrayLike, covariance: npt.ArrayLike, rel_tol: float = NULL_REL_TOL) -> OptimizedStack:
    """
    Optimize signal and measurement axes for a stack of (M, Q) pairs.

    Args:
        signal: Array of shape (..., 3, 3)
        covariance: Array of shape (..., 3, 3), PSD
        rel_tol: Null cut passed to the inverse square root

    Returns:
        OptimizedStack with leading shape (...)

    Raises:
        ValueError: If any covariance matrix vanishes or is not PSD
    """
    m_stack = np.asarray(signal, dtype=float)
    q_stack = np.asarray(covariance, dtype=float)
    roots, null, _ = _inv_sqrt_stack(q_stack, rel_tol)
    rank = 3 - np.sum(null, axis=-1)
    if np.any(rank == 0):
        msg = "Covariance matrix vanishes; no measurement axis has finite variance"
        raise ValueError(msg)

    product = m_stack @ roots
    left, singular_values, right_t = np.linalg.svd(product)
    signal_axes = left[..., :, 0].copy()
    measurement_axes = np.einsum("...ij,...j->...i", roots, right_t[..., 0, :])
    norms = np.linalg.norm(measurement_axes, axis=-1, keepdims=True)
    measurement_axes = measurement_axes / np.where(norms > 0, norms, 1.0)

    signs = _canonical_signs(signal_axes)
    signal_axes *= signs[..., None]
    measurement_axes *= signs[..., None]

    top = singular_values[..., 0]
    zero = top == 0
    degenerate = ~zero & (top - singular_values[..., 1] <= DEGENERACY_REL_TOL * top)

    for index in map(tuple, np.argwhere(zero)):
        signal_axes[index] = (0.0, 0.0, 1.0)
        measurement_axes[index] = (0.0, 0.0, 1.0)

    for index in map(tuple, np.argwhere(degenerate)):
        values = singular_values[index]
        multiplicity = int(np.sum(values[0] - values <= DEGENERACY_REL_TOL * values[0]))
        right = canonical_vector_in_span(right_t[index][:multiplicity].T)
        left_axis = product[index] @ right / values[0]
        measurement = roots[index] @ right
        measurement /= np.linalg.norm(measurement)
        sign = _canonical_signs(left_axis)
        signal_axes[index] = sign * left_axis
        measurement_axes[index] = sign * measurement

    return OptimizedStack(
        snr=top,
        signal_axes=signal_axes,
        measurement_axes=measurement_axes,
        singular_values=singular_values,
        rank_q=rank,
    )


def optimize_directions(
    signal: npt.ArrayLike, covariance: npt.ArrayLike, rel_tol: float = NULL_REL_TOL
) -> OptimizedSensitivity:
    """
    Maximal SNR and optimal axes of a single (M, Q) pair.

    The SNR is the largest singular value of B = M Q^{-1/2}; the signal axis
    is the matching left singular vector and the measurement axis is
    Q^{-1/2} times the right singular vector, normalized. Null directions of
    Q never enter the measurement search.

    Args:
        signal: 3x3 signal matrix M
        covariance: 3x3 PSD covariance matrix Q
        rel_tol: Null cut for the covariance eigenvalues

    Returns:
        OptimizedSensitivity

    Raises:
        ValueError: If Q vanishes, is not symmetric or is not PSD
    """
    q = np.asarray(covariance, dtype=float)
    if q.shape != (3, 3) or np.max(np.abs(q - q.T)) > SYMMETRY_TOL:
        msg = "Covariance must be a symmetric 3x3 matrix"
        raise ValueError(msg)

    result = optimize_stack(signal, q, rel_tol)
    values = result.singular_values
    return OptimizedSensitivity(
        snr=float(result.snr),
        signal_axis=Direction.from_vector(result.signal_axes),
        measurement_axis=Direction.from_vector(result.measurement_axes),
        singular_values=(float(values[0]), float(values[1]), float(values[2])),
        rank_q=int(result.rank_q),
    )


def sensitivity(point: ProtocolPoint) -> OptimizedSensitivity:
    """Closed-form moments of the point followed by axis optimization."""
    matrices = moments.moment_matrices(point)
    return optimize_directions(matrices.signal, matrices.covariance)


def sensitivity_stack(
    n_particles: int,
    mu: Union[float, FloatArray],
    nu: Union[float, FloatArray],
    noise: NoiseModel,
) -> OptimizedStack:
    """Vectorized sensitivity over broadcast arrays of mu and nu."""
    signal, covariance, _ = moments.moment_stack(n_particles, mu, nu, noise)
    return optimize_stack(signal, covariance)


def snr_ratio(signal: npt.ArrayLike, covariance: npt.ArrayLike, signal_axis: Direction, measurement_axis: Direction) -> float:
    """
    Evaluate n^T M m / sqrt(m^T Q m) for given axes.

    Raises:
        ValueError: If the measurement variance vanishes
    """
    n = signal_axis.as_array()
    m = measurement_axis.as_array()
    variance = float(m @ np.asarray(covariance, dtype=float) @ m)
    if variance <= 0:
        msg = "Measurement axis has zero variance"
        raise ValueError(msg)
    return float(n @ np.asarray(signal, dtype=float) @ m) / np.sqrt(variance)
