"""
Scaling of class maxima with particle number.

Each protocol class is searched inside its own region of the (mu, nu) plane
and the resulting maxima are fitted to SNR = c * N^alpha in log-log space.
"""

import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Optional

import numpy as np
import numpy.typing as npt

from ramsey_echo.core.core import NoiseModel, ParameterGrid, ProtocolPoint
from ramsey_echo.logger import logging_helper
from ramsey_echo.optimizer import landscape as landscape_module
from ramsey_echo.optimizer.landscape import LocalMaximum, ProtocolClass

logger = logging_helper.get_logger(__name__)

MIN_FIT_POINTS = 4
MIN_FIT_PARTICLES = 16
DEFAULT_RESOLUTION = 65
# Only the highest grid maxima are refined; the OUT band oscillates rapidly in nu.
MAX_REFINED_CANDIDATES = 8


@dataclass(frozen=True)
class ScalingFit:
    """
    Power law SNR = c * N^alpha.

    Attributes:
        c: Prefactor
        alpha: Exponent
        n_range: Particle numbers that entered the fit
        residual: Root-mean-square residual of ln(SNR)
    """

    c: float
    alpha: float
    n_range: tuple[int, ...]
    residual: float


def class_region(protocol_class: ProtocolClass, n_particles: int) -> tuple[tuple[float, float], tuple[float, float]]:
    """((mu_min, mu_max), (nu_min, nu_max)) covering one class."""
    threshold = landscape_module.class_threshold(n_particles)
    if protocol_class is ProtocolClass.SQUEEZING:
        box = min(threshold, np.pi)
        return (0.0, box), (-box, box)
    if protocol_class is ProtocolClass.GHZ:
        return (max(np.pi - threshold, 0.0), np.pi), (-np.pi, np.pi)
    if np.pi - threshold <= threshold:
        msg = f"No over-un-twisting band exists for N={n_particles}"
        raise ValueError(msg)
    return (threshold, np.pi - threshold), (-np.pi, np.pi)


def class_maximum(
    protocol_class: ProtocolClass, n_particles: int, noise: NoiseModel, resolution: int = DEFAULT_RESOLUTION
) -> Optional[LocalMaximum]:
    """
    Refined best local maximum inside one class region.

    The region is sampled with `resolution` mu rows and at least 8 sqrt(N)
    nu columns, so the ridge widths that shrink like 1/sqrt(N) stay resolved.
    Strict grid maxima are refined by compass search clamped to the region.

    Returns:
        The best maximum whose refined point still belongs to the class, or
        None if the region holds none
    """
    if resolution < 3:
        msg = f"Resolution must be >= 3, got {resolution}"
        raise ValueError(msg)

    (mu_min, mu_max), (nu_min, nu_max) = class_region(protocol_class, n_particles)
    nu_count = max(resolution, math.ceil(8 * math.sqrt(n_particles)) + 1)
    grid = ParameterGrid.from_arrays(np.linspace(mu_min, mu_max, resolution), np.linspace(nu_min, nu_max, nu_count))
    values = landscape_module.landscape(grid, n_particles, noise).values
    steps = ((mu_max - mu_min) / (resolution - 1), (nu_max - nu_min) / (nu_count - 1))
    bounds = ((mu_min, mu_max), (nu_min, nu_max))

    candidates = sorted(landscape_module.strict_maxima(values), key=lambda index: -values[index])
    best: Optional[tuple[float, float, float]] = None
    for row, col in candidates[:MAX_REFINED_CANDIDATES]:
        start = (float(grid.mu_values[row]), float(grid.nu_values[col]))
        mu, nu, snr = landscape_module.refine_maximum(n_particles, noise, start, steps, bounds)
        if landscape_module.classify(mu, nu, n_particles) is not protocol_class:
            continue
        if best is None or snr > best[2]:
            best = (mu, nu, snr)

    if best is None:
        logger.info(f"No {protocol_class.value} maximum for N={n_particles} {noise}")
        return None

    logger.debug(f"{protocol_class.value} N={n_particles}: mu={best[0]:.6f} nu={best[1]:.6f} snr={best[2]:.6f}")
    return landscape_module.local_maximum_at(protocol_class, ProtocolPoint(n_particles, best[0], best[1], noise))


def fit_power_law(n_values: Sequence[int], snr_values: npt.ArrayLike) -> ScalingFit:
    """
    Least-squares fit of ln(SNR) = ln(c) + alpha ln(N).

    Raises:
        ValueError: For fewer than two points or non-positive values
    """
    n_array = np.asarray(n_values, dtype=float)
    snr_array = np.asarray(snr_values, dtype=float)
    if n_array.shape != snr_array.shape or n_array.size < 2:
        msg = "Need at least two (N, SNR) pairs of equal length"
        raise ValueError(msg)
    if np.any(n_array <= 0) or np.any(snr_array <= 0):
        msg = "Power-law fit needs positive N and SNR"
        raise ValueError(msg)

    log_n = np.log(n_array)
    log_snr = np.log(snr_array)
    alpha, intercept = np.polyfit(log_n, log_snr, 1)
    residual = math.sqrt(float(np.mean((log_snr - (alpha * log_n + intercept)) ** 2)))
    return ScalingFit(
        c=math.exp(intercept), alpha=float(alpha), n_range=tuple(int(n) for n in n_values), residual=residual
    )


def fit_scaling(
    protocol_class: ProtocolClass, noise: NoiseModel, n_list: Sequence[int], resolution: int = DEFAULT_RESOLUTION
) -> ScalingFit:
    """
    Asymptotic scaling of a class maximum.

    Every N in n_list is searched; the fit uses the upper half of the list,
    where the scaling has settled.

    Args:
        protocol_class: Class whose maximum is tracked
        noise: Dephasing strengths
        n_list: At least 4 increasing particle numbers, each >= 16

    Returns:
        ScalingFit over the upper half of n_list

    Raises:
        ValueError: For an invalid n_list or if some N has no class maximum
    """
    n_values = [int(n) for n in n_list]
    if len(n_values) < MIN_FIT_POINTS:
        msg = f"Scaling fit needs at least {MIN_FIT_POINTS} particle numbers, got {len(n_values)}"
        raise ValueError(msg)
    if any(b <= a for a, b in zip(n_values, n_values[1:])):
        msg = f"Particle numbers must be strictly increasing, got {n_values}"
        raise ValueError(msg)
    if n_values[0] < MIN_FIT_PARTICLES:
        msg = f"Scaling fit needs N >= {MIN_FIT_PARTICLES}, got {n_values[0]}"
        raise ValueError(msg)

    maxima = []
    for n_particles in n_values:
        maximum = class_maximum(protocol_class, n_particles, noise, resolution)
        if maximum is None:
            msg = f"No {protocol_class.value} maximum for N={n_particles} with {noise}"
            raise ValueError(msg)
        maxima.append(maximum.snr)

    upper = math.ceil(len(n_values) / 2)
    fit = fit_power_law(n_values[-upper:], maxima[-upper:])
    logger.info(f"{protocol_class.value} {noise}: alpha={fit.alpha:.4f}, c={fit.c:.4f}, residual={fit.residual:.2e}")
    return fit
