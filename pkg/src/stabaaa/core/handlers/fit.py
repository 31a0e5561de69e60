"""Fit command.

This module contains the ``fit`` subcommand: load and normalize the input CSV, run the selected
algorithm, and write the model, stability report, metrics and plot-data artifacts.
"""

import logging
from pathlib import Path
from typing import Optional

import click

from ...config.numerics import DEFAULT_M_MAX, DEFAULT_THETA
from ...config.paths import DEFAULT_OUTPUT_DIR, METRICS_FILE, MODEL_FILE, PLOT_DATA_FILE, STABILITY_FILE
from ...config.settings import (
    ALGORITHMS,
    DEFAULT_ALGORITHM,
    DEFAULT_ERROR_MODE,
    DEFAULT_FREQ_UNIT,
    DEFAULT_TOL,
    ERROR_MODES,
    EXIT_OK,
    EXIT_TOLERANCE,
    FREQ_UNITS,
    REFIT_MODES,
    SDP_BACKENDS,
)
from ...phrases import (
    fit_help,
    max_order_help,
    mmax_help,
    restart_help,
    theta_help,
    tol_help,
    tolerance_not_met_text,
    unstable_model_text,
)
from ...services.backends import SdpSettings
from ...services.export import (
    denormalized_evaluator,
    dumps,
    metrics_document,
    model_document,
    plot_data_csv,
    stability_document,
    write_artifacts,
)
from ...services.pipeline import FitRequest, run_algorithm
from ...utils.formatters import format_warning
from ..dependencies import RunContext
from .decorators import command_handler

logger = logging.getLogger(__name__)


def fit_options(func):
    """Numeric flags shared by ``fit`` and ``compare``."""
    options = [
        click.option("--tol", type=float, default=DEFAULT_TOL, show_default=True, help=tol_help),
        click.option("--theta", type=float, default=DEFAULT_THETA, show_default=True, help=theta_help),
        click.option("--mmax", type=int, default=DEFAULT_M_MAX, show_default=True, help=mmax_help),
        click.option("--max-order", type=int, default=None, help=max_order_help),
        click.option("--freq-unit", type=click.Choice(FREQ_UNITS), default=DEFAULT_FREQ_UNIT, show_default=True),
        click.option("--error-mode", type=click.Choice(ERROR_MODES), default=DEFAULT_ERROR_MODE, show_default=True),
        click.option("--refit-mode", type=click.Choice(REFIT_MODES), default="truncate", show_default=True),
        click.option("--sdp-backend", type=click.Choice(SDP_BACKENDS), default="ipm", show_default=True),
        click.option("--restart", is_flag=True, help=restart_help),
        click.option(
            "-o",
            "--output",
            type=click.Path(file_okay=False, path_type=Path),
            default=DEFAULT_OUTPUT_DIR,
            show_default=True,
        ),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def build_request(algorithm: str, tol, theta, mmax, max_order, error_mode, refit_mode, sdp_backend, restart):
    return FitRequest(
        algorithm=algorithm,
        eps=tol,
        theta=theta,
        m_max=mmax,
        max_iter=max_order,
        error_mode=error_mode,
        refit_mode=refit_mode,
        resume=not restart,
        sdp=SdpSettings(backend=sdp_backend),
    )


@click.command("fit", help=fit_help)
@click.argument("input_csv", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--algorithm", type=click.Choice(ALGORITHMS), default=DEFAULT_ALGORITHM, show_default=True)
@fit_options
@command_handler("fit")
def fit_command(
    run: RunContext,
    input_csv: Path,
    algorithm: str,
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
    request = build_request(algorithm, tol, theta, mmax, max_order, error_mode, refit_mode, sdp_backend, restart)
    loaded = run.load(input_csv, freq_unit)

    with run.trace(algorithm=algorithm) as trace:
        result = run_algorithm(loaded.data, request, trace=trace)

    diagnostics = {"met_tolerance": result.met_tolerance, "seconds": result.seconds, **result.diagnostics}
    document = model_document(result.model, loaded.record, loaded.sha256, algorithm, diagnostics)
    evaluate = denormalized_evaluator(result.model, loaded.record)
    write_artifacts(
        output,
        {
            MODEL_FILE: dumps(document),
            STABILITY_FILE: dumps(stability_document(result.poles, loaded.sha256)),
            METRICS_FILE: dumps(
                metrics_document(
                    result.metrics, loaded.sha256, error_mode, k=result.k, met_tolerance=result.met_tolerance
                )
            ),
            PLOT_DATA_FILE: plot_data_csv(evaluate, loaded.raw, freq_unit),
        },
    )

    if not result.stable:
        unstable = int((result.poles.poles.real >= 0).sum())
        logger.warning(unstable_model_text.format(count=unstable, path=output / STABILITY_FILE))
    if not result.met_tolerance:
        click.echo(format_warning(tolerance_not_met_text.format(eps=tol, e_inf=result.metrics.e_inf)), err=True)
        return EXIT_TOLERANCE
    return EXIT_OK


def register(cli: click.Group) -> None:
    cli.add_command(fit_command)
