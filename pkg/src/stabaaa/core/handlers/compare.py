"""Compare command.

This module contains the ``compare`` subcommand: run several algorithms on the same normalized dataset
in worker threads and write one metrics row per algorithm.
"""

import asyncio
import logging
from pathlib import Path
from typing import Optional

import click

from ...config.paths import COMPARE_FILE
from ...config.settings import ALGORITHMS, DEFAULT_COMPARE, EXIT_OK
from ...phrases import compare_help
from ...services.export import metrics_csv, write_artifacts
from ...services.pipeline import FitResult, compare_algorithms
from ...utils.formatters import format_metrics_table
from ..dependencies import RunContext
from ..errors import DataValidationError, StabAaaError
from .decorators import command_handler
from .fit import build_request, fit_options

logger = logging.getLogger(__name__)


def parse_algorithms(value: str):
    names = [name.strip() for name in value.split(",") if name.strip()]
    unknown = [name for name in names if name not in ALGORITHMS]
    if not names or unknown:
        raise DataValidationError(f"unknown algorithm(s) {unknown or value!r}; expected a subset of {ALGORITHMS}")
    return list(dict.fromkeys(names))


@click.command("compare", help=compare_help)
@click.argument("input_csv", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--algorithms", default=DEFAULT_COMPARE, show_default=True)
@fit_options
@command_handler("compare")
def compare_command(
    run: RunContext,
    input_csv: Path,
    algorithms: str,
    tol: float,
    theta: float,
    mmax: int,
    max_order: Optional[int],
    freq_unit: str,
    error_mode: str,
    refit_mode: str,
    sdp_backend: str,
    restart: bool,
    output: Path,
) -> int:
    names = parse_algorithms(algorithms)
    request = build_request(names[0], tol, theta, mmax, max_order, error_mode, refit_mode, sdp_backend, restart)
    loaded = run.load(input_csv, freq_unit)

    with run.trace() as trace:
        results = asyncio.run(compare_algorithms(loaded.data, request, names, trace=trace))

    rows = []
    for name, result in zip(names, results):
        if isinstance(result, FitResult):
            rows.append(result.summary())
            continue
        if not isinstance(result, StabAaaError):
            raise result
        logger.error(f"{name} failed: {result}")
        rows.append({"algorithm": name, "status": type(result).__name__})

    write_artifacts(output, {COMPARE_FILE: metrics_csv(rows)})
    click.echo(format_metrics_table(rows, ("algorithm", "k", "e_inf", "e_2", "e_rms", "stable", "status")))
    return EXIT_OK


def register(cli: click.Group) -> None:
    cli.add_command(compare_command)
