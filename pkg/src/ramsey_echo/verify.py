"""
Cross-check suite behind the verify command.

Every check compares two independent routes to the same quantity (closed
forms against exact evolution, Fisher bounds against optimized SNRs, exact
symmetries) and reports the worst deviation it saw against its tolerance.
"""

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from ramsey_echo.core.core import NoiseModel, ProtocolPoint
from ramsey_echo.logger import logging_helper
from ramsey_echo.optimizer import optimizer
from ramsey_echo.oracle import oracle
from ramsey_echo.qfi import qfi
from ramsey_echo.wigner import wigner

logger = logging_helper.get_logger(__name__)

SEED = 20240917

RAMSEY_ANCHOR_N = (2, 10, 100, 1000, 10_000)
RAMSEY_TOL = 1e-9
MOMENT_TOL = 1e-9
ORACLE_TOL = 1e-8
QFI_TOL = 1e-9
QFI_SPECTRAL_TOL = 1e-8
QCRB_TOL = 1e-9
SYMMETRY_TOL = 1e-10
WIGNER_TOL = 1e-9

FULL_MOMENT_POINTS = 100
QUICK_MOMENT_POINTS = 20
QUICK_MAX_PARTICLES = 8


@dataclass(frozen=True)
class CheckResult:
    """
    Outcome of one check.

    Attributes:
        name: Check identifier
        passed: Whether the worst deviation stayed within tolerance
        value: Worst deviation observed
        tolerance: Allowed deviation
        detail: Where the worst deviation occurred, or the error raised
    """

    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""


@dataclass(frozen=True)
class VerificationReport:
    results: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results)

    @property
    def failed(self) -> list[str]:
        return [result.name for result in self.results if not result.passed]


class _Worst:
    """Running maximum of a deviation together with where it happened."""

    def __init__(self):
        self.value = 0.0
        self.detail = ""

    def update(self, value: float, detail: str) -> None:
        if not np.isfinite(value) or value > self.value:
            self.value = float(value) if np.isfinite(value) else float("inf")
            self.detail = detail

    def result(self, name: str, tolerance: float) -> CheckResult:
        return CheckResult(name, self.value <= tolerance, self.value, tolerance, self.detail)


def _relative(actual: float, expected: float) -> float:
    return abs(actual - expected) / max(abs(expected), 1.0)


def check_ramsey_anchor(quick: bool, rng: np.random.Generator) -> CheckResult:
    """mu = nu = 0 reproduces the standard quantum limit sqrt(N)."""
    worst = _Worst()
    for n_particles in RAMSEY_ANCHOR_N:
        snr = optimizer.sensitivity(ProtocolPoint(n_particles, 0.0, 0.0)).snr
        worst.update(_relative(snr, np.sqrt(n_particles)), f"N={n_particles} snr={snr!r}")
    return worst.result("ramsey_anchor", RAMSEY_TOL)


def _random_points(
    rng: np.random.Generator, count: int, max_particles: int, collective: float, individual: float
) -> list[ProtocolPoint]:
    points = []
    for _ in range(count):
        noise = NoiseModel(
            collective=float(rng.uniform(0, collective)) if collective else 0.0,
            individual=float(rng.uniform(0, individual)) if individual else 0.0,
        )
        n_particles = int(rng.integers(1, max_particles + 1))
        mu, nu = (float(v) for v in rng.uniform(-np.pi, np.pi, size=2))
        points.append(ProtocolPoint(n_particles, mu, nu, noise))
    return points


def _moment_check(name: str, points: list[ProtocolPoint]) -> CheckResult:
    worst = _Worst()
    for point in points:
        worst.update(oracle.verify_moment_matrices(point), str(point))
    return worst.result(name, MOMENT_TOL)


def check_moment_formulas_noiseless(quick: bool, rng: np.random.Generator) -> CheckResult:
    count = QUICK_MOMENT_POINTS if quick else FULL_MOMENT_POINTS
    max_n = QUICK_MAX_PARTICLES if quick else 12
    return _moment_check("moment_formulas_noiseless", _random_points(rng, count, max_n, 0.0, 0.0))


def check_moment_formulas_collective(quick: bool, rng: np.random.Generator) -> CheckResult:
    count = QUICK_MOMENT_POINTS if quick else FULL_MOMENT_POINTS
    max_n = QUICK_MAX_PARTICLES if quick else 12
    return _moment_check("moment_formulas_collective", _random_points(rng, count, max_n, 1.0, 0.0))


def check_moment_formulas_individual(quick: bool, rng: np.random.Generator) -> CheckResult:
    count = QUICK_MOMENT_POINTS if quick else FULL_MOMENT_POINTS
    max_n = 6 if quick else 8
    return _moment_check("moment_formulas_individual", _random_points(rng, count, max_n, 0.0, 2.0))


def check_moment_formulas_combined(quick: bool, rng: np.random.Generator) -> CheckResult:
    """Collective and individual dephasing together, composed multiplicatively."""
    count = QUICK_MOMENT_POINTS if quick else FULL_MOMENT_POINTS
    max_n = 6 if quick else 8
    return _moment_check("moment_formulas_combined", _random_points(rng, count, max_n, 1.0, 2.0))


def check_oracle_sensitivity(quick: bool, rng: np.random.Generator) -> CheckResult:
    """
    Optimized closed-form SNR against exact evolution at the optimizer's axes.

    Points where the optimal measurement has no variance in the exact state
    are counted as skipped rather than compared.
    """
    side = 5 if quick else 9
    mu_values = np.linspace(0, np.pi, side)
    nu_values = np.linspace(-np.pi, np.pi, side)
    cases = [(n, NoiseModel(collective=s)) for n in ((4, 8) if quick else (4, 8, 12, 16)) for s in (0.0, 0.1, 0.5)]
    cases += [(n, NoiseModel(individual=s)) for n in ((4,) if quick else (4, 6, 8)) for s in (0.5, 2.0)]

    worst = _Worst()
    skipped = 0
    for n_particles, noise in cases:
        for mu in mu_values:
            for nu in nu_values:
                point = ProtocolPoint(n_particles, float(mu), float(nu), noise)
                result = optimizer.sensitivity(point)
                try:
                    direct = oracle.direct_sensitivity(point, result.signal_axis, result.measurement_axis)
                except ValueError:
                    skipped += 1
                    continue
                worst.update(_relative(direct, result.snr), f"{point} analytic={result.snr!r} exact={direct!r}")

    if skipped:
        logger.info(f"oracle_sensitivity: {skipped} degenerate points skipped")
    return worst.result("oracle_sensitivity", ORACLE_TOL)


def check_qfi_endpoints(quick: bool, rng: np.random.Generator) -> CheckResult:
    """Closed-form QFI reaches N at mu = 0 and N^2 at mu = pi."""
    worst = _Worst()
    for n_particles in (2, 4, 8, 32):
        low = qfi.qfi_closed_form_max(0.0, n_particles)
        high = qfi.qfi_closed_form_max(np.pi, n_particles)
        worst.update(_relative(low, n_particles), f"N={n_particles} mu=0 F={low!r}")
        worst.update(_relative(high, n_particles**2), f"N={n_particles} mu=pi F={high!r}")
    return worst.result("qfi_endpoints", QFI_TOL)


def check_qfi_spectral(quick: bool, rng: np.random.Generator) -> CheckResult:
    """Closed-form QFI against the spectral QFI of the exact noiseless state."""
    worst = _Worst()
    for n_particles in (4, 8) if quick else (4, 8, 16, 32, 64):
        for mu in rng.uniform(0, np.pi, size=3):
            closed = qfi.qfi_closed_form_max(float(mu), n_particles)
            spectral = qfi.qfi_max(float(mu), 0.0, n_particles).value
            worst.update(
                _relative(spectral, closed), f"N={n_particles} mu={mu!r} closed={closed!r} spectral={spectral!r}"
            )
    return worst.result("qfi_spectral", QFI_SPECTRAL_TOL)


def check_qcrb(quick: bool, rng: np.random.Generator) -> CheckResult:
    """The nu-optimized SNR^2 never exceeds the QFI of the prepared state."""
    n_particles = QUICK_MAX_PARTICLES if quick else 32
    mu_values = np.linspace(0, np.pi, 65)
    worst = _Worst()
    for sigma in (0.0, 0.1):
        report = qfi.qcrb_check(n_particles, NoiseModel(collective=sigma), mu_values)
        worst.update(max(report.max_violation, 0.0), f"N={n_particles} sigma={sigma}")
    return worst.result("qcrb", QCRB_TOL)


def check_sign_symmetry(quick: bool, rng: np.random.Generator) -> CheckResult:
    """sensitivity(mu, nu) == sensitivity(-mu, -nu) for every noise setting."""
    count = 50 if quick else 200
    worst = _Worst()
    for index in range(count):
        noise = NoiseModel(collective=float(rng.uniform(0, 1)), individual=float(rng.uniform(0, 2)))
        if index % 3 == 0:
            noise = NoiseModel()
        n_particles = int(rng.integers(2, 257))
        mu, nu = (float(v) for v in rng.uniform(-np.pi, np.pi, size=2))
        forward = optimizer.sensitivity(ProtocolPoint(n_particles, mu, nu, noise)).snr
        mirrored = optimizer.sensitivity(ProtocolPoint(n_particles, -mu, -nu, noise)).snr
        worst.update(_relative(mirrored, forward), f"N={n_particles} mu={mu!r} nu={nu!r} {noise}")
    return worst.result("sign_symmetry", SYMMETRY_TOL)


def check_wigner_trace_identity(quick: bool, rng: np.random.Generator) -> CheckResult:
    """Coefficient overlap of random Hermitian operators equals tr(A B^dagger)."""
    worst = _Worst()
    for n_particles in (4, 8) if quick else (4, 8, 16):
        dimension = n_particles + 1
        for _ in range(20):
            pair = []
            for _ in range(2):
                raw = rng.normal(size=(dimension, dimension)) + 1j * rng.normal(size=(dimension, dimension))
                pair.append((raw + raw.conj().T) / 2)
            first, second = pair
            expected = float(np.real(np.trace(first @ second.conj().T)))
            overlap = wigner.sphere_overlap(wigner.wigner_field(first), wigner.wigner_field(second))
            scale = float(np.linalg.norm(first) * np.linalg.norm(second))
            worst.update(abs(overlap - expected) / scale, f"N={n_particles}")
    return worst.result("wigner_trace_identity", WIGNER_TOL)


def check_out_overlap(quick: bool, rng: np.random.Generator) -> CheckResult:
    """Field overlap of the double-inversion split equals the exact <S_y>."""
    n_particles = QUICK_MAX_PARTICLES if quick else 32
    worst = _Worst()
    for phi in (-0.02, 0.02):
        report = wigner.out_mechanism_report(n_particles, np.pi / 2, phi)
        worst.update(
            _relative(report.overlap, report.oracle_expectation),
            f"N={n_particles} phi={phi} overlap={report.overlap!r} exact={report.oracle_expectation!r}",
        )
    return worst.result("out_overlap", WIGNER_TOL)


CHECKS: tuple[Callable[[bool, np.random.Generator], CheckResult], ...] = (
    check_ramsey_anchor,
    check_moment_formulas_noiseless,
    check_moment_formulas_collective,
    check_moment_formulas_individual,
    check_moment_formulas_combined,
    check_oracle_sensitivity,
    check_qfi_endpoints,
    check_qfi_spectral,
    check_qcrb,
    check_sign_symmetry,
    check_wigner_trace_identity,
    check_out_overlap,
)


def run_verification(quick: bool = False, seed: int = SEED) -> VerificationReport:
    """
    Run every check.

    Args:
        quick: Restrict to N <= 8 and fewer samples
        seed: Seed of the random sample points

    Returns:
        VerificationReport; a check that raises counts as failed
    """
    rng = np.random.default_rng(seed)
    results = []
    for check in CHECKS:
        name = check.__name__.removeprefix("check_")
        try:
            result = check(quick, rng)
        except Exception as e:
            logger.error(f"Check {name} raised: {e}")
            result = CheckResult(name, False, float("inf"), 0.0, f"{type(e).__name__}: {e}")
        status = "ok" if result.passed else "FAILED"
        logger.info(f"{result.name}: {status} (worst {result.value:.3e}, tolerance {result.tolerance:.1e})")
        results.append(result)
    return VerificationReport(results=tuple(results))
