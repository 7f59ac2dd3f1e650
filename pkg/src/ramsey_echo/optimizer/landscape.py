"""
Sensitivity landscapes over (mu, nu) and the analyses built on them.

A landscape is the optimized SNR on a rectangular grid. From it we read off
nu-optimized slices, the protocol class of each point and the refined local
maximum of every class.
"""

import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
import numpy.typing as npt
from scipy.optimize import minimize_scalar

from ramsey_echo.core.core import Direction, NoiseModel, ParameterGrid, ProtocolPoint
from ramsey_echo.logger import logging_helper
from ramsey_echo.optimizer import optimizer

logger = logging_helper.get_logger(__name__)

FloatArray = npt.NDArray[np.float64]

# Rows per work item; fixed so results never depend on the thread count.
ROWS_PER_TASK = 16
MIN_MAXIMA_RESOLUTION = 65
REFINE_TOL = 1e-6
MAX_REFINE_STEPS = 10_000
SLICE_XATOL = 1e-6
NU_SEARCH_COUNT = 513
# Unit offsets of the 8-neighbourhood, in a fixed order.
COMPASS = np.array([(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)], dtype=float)


class ProtocolClass(Enum):
    """Regions of the (mu, nu) plane with distinct entanglement mechanisms."""

    SQUEEZING = "Squeezing"
    OVER_UN_TWISTING = "OverUnTwisting"
    GHZ = "GHZ"


CLASS_ORDER = (ProtocolClass.SQUEEZING, ProtocolClass.OVER_UN_TWISTING, ProtocolClass.GHZ)


@dataclass(frozen=True)
class LandscapeGrid:
    """
    Optimized SNR on a parameter grid.

    Attributes:
        grid: The (mu, nu) sampling
        values: SNR, shape (len(mu), len(nu))
        signal_axes: Optimal n per point, shape (len(mu), len(nu), 3)
        measurement_axes: Optimal m per point, shape (len(mu), len(nu), 3)
        n_particles: Particle number the landscape was computed for
        noise: Noise model the landscape was computed for
    """

    grid: ParameterGrid
    values: FloatArray
    signal_axes: FloatArray
    measurement_axes: FloatArray
    n_particles: int
    noise: NoiseModel

    def __post_init__(self):
        shape = self.grid.shape
        if self.values.shape != shape:
            msg = f"Landscape values have shape {self.values.shape}, grid has {shape}"
            raise ValueError(msg)
        if self.signal_axes.shape != (*shape, 3) or self.measurement_axes.shape != (*shape, 3):
            msg = "Landscape direction arrays do not match the grid"
            raise ValueError(msg)
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0):
            msg = "Landscape values must be finite and non-negative"
            raise ValueError(msg)


@dataclass(frozen=True)
class SliceRecord:
    """Best excess inversion for one twisting strength."""

    mu: float
    best_nu: float
    snr_sq_over_n: float


@dataclass(frozen=True)
class LocalMaximum:
    """Refined maximum of one protocol class."""

    protocol_class: ProtocolClass
    mu: float
    nu: float
    snr: float
    signal_axis: Direction
    measurement_axis: Direction


def _snr_at(n_particles: int, mu: npt.ArrayLike, nu: npt.ArrayLike, noise: NoiseModel) -> FloatArray:
    return optimizer.sensitivity_stack(n_particles, np.asarray(mu, dtype=float), np.asarray(nu, dtype=float), noise).snr


def landscape(grid: ParameterGrid, n_particles: int, noise: NoiseModel, threads: int = 1) -> LandscapeGrid:
    """
    Evaluate the optimized SNR at every grid point.

    Rows are grouped into fixed blocks and evaluated on a thread pool; the
    blocks are reassembled in mu order, so the result is identical for any
    thread count.

    Args:
        grid: The (mu, nu) sampling
        n_particles: Particle number N
        noise: Dephasing strengths
        threads: Worker threads (1 evaluates inline)

    Returns:
        LandscapeGrid
    """
    if threads < 1:
        msg = f"Thread count must be >= 1, got {threads}"
        raise ValueError(msg)

    mu = grid.mu_array
    nu = grid.nu_array
    blocks = [mu[start : start + ROWS_PER_TASK] for start in range(0, mu.size, ROWS_PER_TASK)]
    logger.info(f"Landscape N={n_particles} {noise}: {mu.size}x{nu.size} points in {len(blocks)} blocks")

    def evaluate(block: FloatArray) -> optimizer.OptimizedStack:
        return optimizer.sensitivity_stack(n_particles, block[:, None], nu[None, :], noise)

    if threads == 1:
        results = [evaluate(block) for block in blocks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            results = list(executor.map(evaluate, blocks))

    return LandscapeGrid(
        grid=grid,
        values=np.concatenate([r.snr for r in results], axis=0),
        signal_axes=np.concatenate([r.signal_axes for r in results], axis=0),
        measurement_axes=np.concatenate([r.measurement_axes for r in results], axis=0),
        n_particles=n_particles,
        noise=noise,
    )


def default_nu_search() -> FloatArray:
    return np.linspace(-np.pi, np.pi, NU_SEARCH_COUNT)


def nu_optimized_slice(
    mu_values: Sequence[float],
    n_particles: int,
    noise: NoiseModel,
    nu_search: Optional[npt.ArrayLike] = None,
) -> list[SliceRecord]:
    """
    Maximize the SNR over nu for each mu.

    Each mu is first scanned on nu_search, then refined with a bounded
    scalar minimization between the neighbours of the best node.

    Args:
        mu_values: Twisting strengths to evaluate
        n_particles: Particle number N
        noise: Dephasing strengths
        nu_search: Increasing nu samples covering [-pi, pi] (513 nodes by default)

    Returns:
        One SliceRecord per mu, carrying max_nu SNR^2 / N
    """
    nu = default_nu_search() if nu_search is None else np.asarray(nu_search, dtype=float)
    if nu.ndim != 1 or nu.size < 3 or np.any(np.diff(nu) <= 0):
        msg = "nu_search must be an increasing sequence of at least 3 values"
        raise ValueError(msg)
    if nu[0] > -np.pi + 1e-12 or nu[-1] < np.pi - 1e-12:
        msg = f"nu_search must cover [-pi, pi], got [{nu[0]}, {nu[-1]}]"
        raise ValueError(msg)

    mu = np.asarray(mu_values, dtype=float).reshape(-1)
    scan = _snr_at(n_particles, mu[:, None], nu[None, :], noise)
    logger.info(f"Slice N={n_particles} {noise}: {mu.size} mu values over {nu.size} nu nodes")

    records = []
    for row, mu_value in enumerate(mu):
        best = int(np.argmax(scan[row]))
        best_nu = float(nu[best])
        best_snr = float(scan[row, best])
        lower = float(nu[max(best - 1, 0)])
        upper = float(nu[min(best + 1, nu.size - 1)])
        refined = minimize_scalar(
            lambda v, m=mu_value: -float(_snr_at(n_particles, m, v, noise)),
            bounds=(lower, upper),
            method="bounded",
            options={"xatol": SLICE_XATOL},
        )
        if refined.success and -refined.fun > best_snr:
            best_nu, best_snr = float(refined.x), float(-refined.fun)
        logger.debug(f"mu={mu_value:.6f}: best nu={best_nu:.6f}, snr={best_snr:.6f}")
        records.append(SliceRecord(mu=float(mu_value), best_nu=best_nu, snr_sq_over_n=best_snr**2 / n_particles))

    return records


def class_threshold(n_particles: int) -> float:
    """Width 4/sqrt(N) of the squeezing box and the GHZ band."""
    return 4.0 / math.sqrt(n_particles)


def classify(mu: float, nu: float, n_particles: int) -> ProtocolClass:
    """
    Assign a protocol to its class.

    Squeezing wins on the box boundary; GHZ is decided by mu alone.

    Raises:
        ValueError: If N < 2 or mu lies outside [0, pi]
    """
    if n_particles < 2:
        msg = f"Classification needs N >= 2, got {n_particles}"
        raise ValueError(msg)
    if not 0 <= mu <= np.pi:
        msg = f"Classification needs 0 <= mu <= pi, got {mu}; map negative mu by the sign symmetry"
        raise ValueError(msg)

    threshold = class_threshold(n_particles)
    if abs(mu) <= threshold and abs(nu) <= threshold:
        return ProtocolClass.SQUEEZING
    if mu >= np.pi - threshold:
        return ProtocolClass.GHZ
    return ProtocolClass.OVER_UN_TWISTING


def strict_maxima(values: FloatArray) -> list[tuple[int, int]]:
    """Indices strictly greater than all 8 neighbours; the border counts as -inf."""
    padded = np.pad(values, 1, mode="constant", constant_values=-np.inf)
    rows, cols = values.shape
    center = padded[1:-1, 1:-1]
    mask = np.ones(values.shape, dtype=bool)
    for d_row, d_col in COMPASS.astype(int):
        mask &= center > padded[1 + d_row : 1 + d_row + rows, 1 + d_col : 1 + d_col + cols]
    return [(int(i), int(j)) for i, j in np.argwhere(mask)]


def refine_maximum(
    n_particles: int,
    noise: NoiseModel,
    start: tuple[float, float],
    steps: tuple[float, float],
    bounds: tuple[tuple[float, float], tuple[float, float]],
) -> tuple[float, float, float]:
    """
    Compass search for a local SNR maximum.

    Moves to the best of the 8 neighbours while that improves the SNR and
    halves both steps otherwise, until the larger step is below 1e-6.

    Args:
        start: Initial (mu, nu)
        steps: Initial (mu, nu) step, usually the grid spacing
        bounds: ((mu_min, mu_max), (nu_min, nu_max)) the search is clamped to

    Returns:
        (mu, nu, snr) of the refined point
    """
    (mu_min, mu_max), (nu_min, nu_max) = bounds
    mu, nu = start
    step_mu, step_nu = steps
    current = float(_snr_at(n_particles, mu, nu, noise))

    for _ in range(MAX_REFINE_STEPS):
        if max(step_mu, step_nu) < REFINE_TOL:
            break
        trial_mu = np.clip(mu + COMPASS[:, 0] * step_mu, mu_min, mu_max)
        trial_nu = np.clip(nu + COMPASS[:, 1] * step_nu, nu_min, nu_max)
        trial = _snr_at(n_particles, trial_mu, trial_nu, noise)
        best = int(np.argmax(trial))
        if trial[best] > current:
            mu, nu, current = float(trial_mu[best]), float(trial_nu[best]), float(trial[best])
        else:
            step_mu /= 2
            step_nu /= 2
    else:
        logger.warning(f"Refinement from {start} stopped after {MAX_REFINE_STEPS} steps")

    return mu, nu, current


def _grid_steps(grid: ParameterGrid) -> tuple[float, float]:
    mu = grid.mu_array
    nu = grid.nu_array
    step_mu = float((mu[-1] - mu[0]) / (mu.size - 1)) if mu.size > 1 else REFINE_TOL
    step_nu = float((nu[-1] - nu[0]) / (nu.size - 1)) if nu.size > 1 else REFINE_TOL
    return step_mu, step_nu


def local_maximum_at(protocol_class: ProtocolClass, point: ProtocolPoint) -> LocalMaximum:
    """Package a refined point with its optimal axes."""
    result = optimizer.sensitivity(point)
    return LocalMaximum(
        protocol_class=protocol_class,
        mu=point.mu,
        nu=point.nu,
        snr=result.snr,
        signal_axis=result.signal_axis,
        measurement_axis=result.measurement_axis,
    )


def find_local_maxima(landscape_grid: LandscapeGrid) -> list[LocalMaximum]:
    """
    Best refined local maximum of each protocol class.

    Strict 8-neighbour maxima of the grid are refined by compass search
    inside the grid bounds. Points with negative mu are mapped through the
    (mu, nu) -> (-mu, -nu) symmetry; points beyond mu = pi are skipped.

    Args:
        landscape_grid: Landscape with at least 65 x 65 points

    Returns:
        Up to three LocalMaximum entries ordered Squeezing, OverUnTwisting, GHZ;
        classes without a maximum are omitted
    """
    rows, cols = landscape_grid.grid.shape
    if rows < MIN_MAXIMA_RESOLUTION or cols < MIN_MAXIMA_RESOLUTION:
        msg = f"Local maxima need a grid of at least {MIN_MAXIMA_RESOLUTION}x{MIN_MAXIMA_RESOLUTION}, got {rows}x{cols}"
        raise ValueError(msg)

    n_particles = landscape_grid.n_particles
    noise = landscape_grid.noise
    mu = landscape_grid.grid.mu_array
    nu = landscape_grid.grid.nu_array
    bounds = ((float(mu[0]), float(mu[-1])), (float(nu[0]), float(nu[-1])))
    steps = _grid_steps(landscape_grid.grid)

    candidates = strict_maxima(landscape_grid.values)
    logger.info(f"Refining {len(candidates)} strict grid maxima (N={n_particles})")

    best: dict[ProtocolClass, tuple[float, float, float]] = {}
    for row, col in candidates:
        mu_value, nu_value, snr = refine_maximum(n_particles, noise, (float(mu[row]), float(nu[col])), steps, bounds)
        if mu_value < 0:
            mu_value, nu_value = -mu_value, -nu_value
        if mu_value > np.pi:
            continue
        protocol_class = classify(mu_value, nu_value, n_particles)
        if protocol_class not in best or snr > best[protocol_class][2]:
            best[protocol_class] = (mu_value, nu_value, snr)

    return [
        local_maximum_at(cls, ProtocolPoint(n_particles, best[cls][0], best[cls][1], noise))
        for cls in CLASS_ORDER
        if cls in best
    ]


def wineland_parameter(n_particles: int, mu: float, noise: NoiseModel) -> float:
    """
    Wineland squeezing parameter of the twisted state, N * dphi^2(mu, mu).

    Raises:
        ValueError: If the state carries no usable polarization
    """
    snr = optimizer.sensitivity(ProtocolPoint(n_particles, mu, mu, noise)).snr
    if snr == 0:
        msg = f"No mean spin left at mu={mu}; the squeezing parameter diverges"
        raise ValueError(msg)
    return n_particles / snr**2
