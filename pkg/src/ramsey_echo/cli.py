#!/usr/bin/env python3
"""
Command-line entry point.

Sub-commands write their results as CSV (default) or JSON tables:

    ramsey_echo landscape --n 32 --grid 257x513 --out landscape.csv
    ramsey_echo slice --n 32 --sigma-list 0,0.1,0.5
    ramsey_echo scaling --n-list 64,128,256,512 --sigma-list 0,0.5
    ramsey_echo verify --quick
    ramsey_echo wigner --n 32 --mu pi/2 --phi -0.02

Exit codes: 0 success, 1 invalid input, 2 failed verification, 3 I/O error.
"""

import argparse
import logging
import math
import sys
from collections.abc import Sequence
from typing import Any, Optional

import numpy as np
import yaml

from ramsey_echo.__about__ import __version__
from ramsey_echo.core.core import NoiseModel, make_grid
from ramsey_echo.files import tables
from ramsey_echo.files.tables import ResultTable
from ramsey_echo.logger import logging_helper
from ramsey_echo.optimizer import landscape as landscape_module
from ramsey_echo.optimizer import scaling
from ramsey_echo.qfi import qfi
from ramsey_echo.run_config.parser import RunConfig, RunConfigParser
from ramsey_echo.verify import run_verification
from ramsey_echo.wigner import wigner

logger = logging_helper.get_logger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_VERIFICATION_FAILED = 2
EXIT_IO_ERROR = 3

LANDSCAPE_COLUMNS = ("mu", "nu", "snr", "nx", "ny", "nz", "mx", "my", "mz", "class")
SLICE_COLUMNS = ("sigma", "mu", "best_nu", "snr_sq_over_N", "qfi_over_N_ideal", "qfi_over_N_dephased")
SCALING_COLUMNS = ("class", "sigma", "Sigma", "c", "alpha", "residual", "n_min", "n_max")
VERIFY_COLUMNS = ("check", "passed", "worst", "tolerance", "detail")
WIGNER_COLUMNS = ("field", "theta", "phi", "value")


class _ArgumentParser(argparse.ArgumentParser):
    """Reports usage errors as ValueError so they map onto the invalid-input exit code."""

    def error(self, message: str):
        raise ValueError(message)


def _class_label(mu: float, nu: float, n_particles: int) -> str:
    if mu < 0:
        mu, nu = -mu, -nu
    if mu > math.pi:
        return ""
    return landscape_module.classify(mu, nu, n_particles).value


def landscape_table(config: RunConfig, n_particles: int) -> ResultTable:
    """Optimized SNR and axes on the configured grid, one row per (mu, nu), mu-major."""
    grid = make_grid(*config.mu_range, config.grid[0], *config.nu_range, config.grid[1])
    result = landscape_module.landscape(grid, n_particles, config.noise, threads=config.threads)

    rows = []
    for i, mu in enumerate(grid.mu_values):
        for j, nu in enumerate(grid.nu_values):
            n_axis = result.signal_axes[i, j]
            m_axis = result.measurement_axes[i, j]
            rows.append(
                (
                    mu,
                    nu,
                    float(result.values[i, j]),
                    *(float(v) for v in n_axis),
                    *(float(v) for v in m_axis),
                    _class_label(mu, nu, n_particles),
                )
            )

    echo = {**config.echo(), "n_particles": n_particles}
    return ResultTable(command="landscape", config=echo, columns=LANDSCAPE_COLUMNS, rows=rows)


def cmd_landscape(config: RunConfig) -> int:
    """One landscape file per particle number; --n-list switches to per-N file names."""
    batch = bool(config.n_list)
    for n_particles in config.n_list or (config.n_particles,):
        logger.info(f"Landscape N={n_particles} on {config.grid[0]}x{config.grid[1]} points")
        table = landscape_table(config, n_particles)
        path = tables.batch_path(config.out, n_particles) if batch else config.out
        tables.write_table(table, path, config.output_format)
    return EXIT_OK


def slice_table(config: RunConfig) -> ResultTable:
    """Best nu per mu with the ideal and dephased Fisher information, one block per sigma."""
    n_particles = config.n_particles
    mu_values = np.linspace(config.mu_range[0], config.mu_range[1], config.mu_count)
    nu_search = np.linspace(config.nu_range[0], config.nu_range[1], config.nu_count)

    rows = []
    for sigma in config.sigma_list or (config.sigma,):
        records = landscape_module.nu_optimized_slice(mu_values, n_particles, NoiseModel(collective=sigma), nu_search)
        for record in records:
            ideal = qfi.qfi_closed_form_max(record.mu, n_particles) / n_particles
            dephased = qfi.qfi_max(record.mu, sigma, n_particles).value / n_particles
            rows.append((float(sigma), record.mu, record.best_nu, record.snr_sq_over_n, ideal, dephased))

    return ResultTable(command="slice", config=config.echo(), columns=SLICE_COLUMNS, rows=rows)


def cmd_slice(config: RunConfig) -> int:
    tables.write_table(slice_table(config), config.out, config.output_format)
    return EXIT_OK


def _noise_settings(config: RunConfig) -> list[NoiseModel]:
    if not config.sigma_list and not config.big_sigma_list:
        return [config.noise]
    settings = [NoiseModel(collective=sigma) for sigma in config.sigma_list]
    settings += [NoiseModel(individual=big_sigma) for big_sigma in config.big_sigma_list]
    return settings


def scaling_table(config: RunConfig) -> ResultTable:
    """
    Power-law fit per (class, noise setting).

    A class without a maximum at some N gets NaN fit values instead of
    aborting the whole report.
    """
    rows = []
    for noise in _noise_settings(config):
        for protocol_class in config.classes:
            try:
                fit = scaling.fit_scaling(protocol_class, noise, config.n_list, config.resolution)
                values = (fit.c, fit.alpha, fit.residual)
            except ValueError as e:
                logger.warning(f"No fit for {protocol_class.value} with {noise}: {e}")
                values = (math.nan, math.nan, math.nan)
            rows.append(
                (
                    protocol_class.value,
                    noise.collective,
                    noise.individual,
                    *values,
                    min(config.n_list),
                    max(config.n_list),
                )
            )
    return ResultTable(command="scaling", config=config.echo(), columns=SCALING_COLUMNS, rows=rows)


def cmd_scaling(config: RunConfig) -> int:
    tables.write_table(scaling_table(config), config.out, config.output_format)
    return EXIT_OK


def cmd_verify(config: RunConfig) -> int:
    """Run the cross-check suite; the exit code is 2 unless every check passes."""
    report = run_verification(quick=config.quick)
    rows = [(r.name, r.passed, r.value, r.tolerance, r.detail) for r in report.results]
    table = ResultTable(
        command="verify",
        config=config.echo(),
        columns=VERIFY_COLUMNS,
        rows=rows,
        metadata={"passed": report.passed},
    )
    tables.write_table(table, config.out, config.output_format)

    if not report.passed:
        logger.error(f"Verification failed: {', '.join(report.failed)}")
        return EXIT_VERIFICATION_FAILED
    logger.info(f"All {len(report.results)} checks passed")
    return EXIT_OK


def wigner_table(config: RunConfig) -> ResultTable:
    """State and measurement fields of the double-inversion split on the sampling grid."""
    report = wigner.out_mechanism_report(
        config.n_particles, config.mu, config.phi, theta_count=config.theta_count, phi_count=config.phi_count
    )

    rows = []
    for name, field in (("state", report.state_field), ("measurement", report.measurement_field)):
        for i, theta in enumerate(field.theta_nodes):
            for j, phi in enumerate(field.phi_nodes):
                rows.append((name, float(theta), float(phi), float(np.real(field.samples[i, j]))))

    metadata = {
        "overlap": report.overlap,
        "quadrature_overlap": wigner.quadrature_overlap(report.state_field, report.measurement_field),
        "oracle_expectation": report.oracle_expectation,
    }
    return ResultTable(command="wigner", config=config.echo(), columns=WIGNER_COLUMNS, rows=rows, metadata=metadata)


def cmd_wigner(config: RunConfig) -> int:
    tables.write_table(wigner_table(config), config.out, config.output_format)
    return EXIT_OK


COMMANDS = {
    "landscape": cmd_landscape,
    "slice": cmd_slice,
    "scaling": cmd_scaling,
    "verify": cmd_verify,
    "wigner": cmd_wigner,
}


def _add_common_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", dest="config_file", default=None, help="YAML run configuration")
    parser.add_argument("--out", dest="out", default=None, help="Output file (standard output by default)")
    parser.add_argument("--format", dest="format", default=None, choices=tables.FORMATS)
    parser.add_argument("--threads", dest="threads", default=None, help="Worker threads")
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging")


def _add_noise_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--sigma", dest="sigma", default=None, help="Collective dephasing strength")
    parser.add_argument("--Sigma", dest="Sigma", default=None, help="Individual dephasing strength")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="ramsey_echo", description="Echo Ramsey protocols with one-axis twisting")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    landscape_parser = commands.add_parser("landscape", help="Optimized SNR over a (mu, nu) grid")
    landscape_parser.add_argument("--n", dest="n", default=None, help="Particle number")
    landscape_parser.add_argument("--n-list", dest="n-list", default=None, help="Batch of particle numbers")
    landscape_parser.add_argument("--mu-range", dest="mu-range", default=None, help="min:max, e.g. 0:pi")
    landscape_parser.add_argument("--nu-range", dest="nu-range", default=None, help="min:max, e.g. -pi:pi")
    landscape_parser.add_argument("--grid", dest="grid", default=None, help="MUxNU, e.g. 257x513")
    _add_noise_options(landscape_parser)

    slice_parser = commands.add_parser("slice", help="SNR with optimized excess inversion against the QFI")
    slice_parser.add_argument("--n", dest="n", default=None)
    slice_parser.add_argument("--sigma", dest="sigma", default=None)
    slice_parser.add_argument("--sigma-list", dest="sigma-list", default=None)
    slice_parser.add_argument("--mu-range", dest="mu-range", default=None)
    slice_parser.add_argument("--nu-range", dest="nu-range", default=None)
    slice_parser.add_argument("--mu-count", dest="mu-count", default=None)
    slice_parser.add_argument("--nu-count", dest="nu-count", default=None)

    scaling_parser = commands.add_parser("scaling", help="Power-law fits of the class maxima")
    scaling_parser.add_argument("--n-list", dest="n-list", default=None)
    scaling_parser.add_argument("--classes", dest="classes", default=None, help="Squeezing,OverUnTwisting,GHZ")
    scaling_parser.add_argument("--sigma-list", dest="sigma-list", default=None)
    scaling_parser.add_argument("--Sigma-list", dest="Sigma-list", default=None)
    scaling_parser.add_argument("--resolution", dest="resolution", default=None)
    _add_noise_options(scaling_parser)

    verify_parser = commands.add_parser("verify", help="Run the cross-check suite")
    verify_parser.add_argument("--quick", dest="quick", action="store_true", default=None, help="N <= 8 subset")

    wigner_parser = commands.add_parser("wigner", help="Wigner fields of the double-inversion split")
    wigner_parser.add_argument("--n", dest="n", default=None)
    wigner_parser.add_argument("--mu", dest="mu", default=None)
    wigner_parser.add_argument("--phi", dest="phi", default=None)
    wigner_parser.add_argument("--theta-count", dest="theta-count", default=None)
    wigner_parser.add_argument("--phi-count", dest="phi-count", default=None)

    for sub_parser in (landscape_parser, slice_parser, scaling_parser, verify_parser, wigner_parser):
        _add_common_options(sub_parser)
    return parser


def _overrides(arguments: argparse.Namespace) -> dict[str, Any]:
    skipped = {"command", "config_file", "verbose"}
    return {key: value for key, value in vars(arguments).items() if key not in skipped and value is not None}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments, validate the configuration and dispatch.

    Returns:
        Exit code
    """
    try:
        arguments = build_parser().parse_args(argv)
    except ValueError as e:
        logger.error(f"Invalid arguments: {e}")
        return EXIT_INVALID
    except SystemExit as e:
        return int(e.code or 0)

    if arguments.verbose:
        logging_helper.set_level(logging.DEBUG)

    try:
        parser = RunConfigParser()
        config = parser.from_sources(arguments.command, arguments.config_file, _overrides(arguments))
        errors = parser.validate(config)
        if errors:
            logger.error("Invalid configuration:")
            for error in errors:
                logger.error(f"  {error}")
            return EXIT_INVALID
        return COMMANDS[config.command](config)
    except (ValueError, yaml.YAMLError) as e:
        logger.error(f"Error: {e}")
        return EXIT_INVALID
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return EXIT_IO_ERROR


def main():
    """Main entry point."""
    sys.exit(run())


if __name__ == "__main__":
    main()
