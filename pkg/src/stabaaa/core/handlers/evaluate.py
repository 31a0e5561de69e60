"""Eval command.

This module contains the ``eval`` subcommand: evaluate a saved model at physical frequencies, undoing the
normalization recorded in the model document, and write the complex responses as CSV.
"""

import logging
from pathlib import Path
from typing import Optional, Tuple

import click
import numpy as np

from ...config.settings import DEFAULT_FREQ_UNIT, EXIT_OK, FREQ_UNITS
from ...phrases import eval_help
from ...services.barycentric import BarycentricModel
from ...services.datamodel import load_frequencies
from ...services.export import denormalized_evaluator, load_model, responses_csv, write_artifacts
from ...services.pipeline import interpolation_spot_check, seeded_rng
from ..dependencies import RunContext
from ..errors import DataValidationError
from .decorators import command_handler

logger = logging.getLogger(__name__)


def grid_frequencies(grid: Tuple[float, float, int], freq_unit: str) -> np.ndarray:
    f_min, f_max, count = grid
    if not (0 < f_min < f_max) or count < 2:
        raise DataValidationError(f"grid needs 0 < FMIN < FMAX and N >= 2, got {grid}")
    freqs = np.logspace(np.log10(f_min), np.log10(f_max), int(count))
    return freqs * (2.0 * np.pi) if freq_unit == "hz" else freqs


@click.command("eval", help=eval_help)
@click.argument("model_json", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("freqs_csv", required=False, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--grid", type=(float, float, int), default=None, metavar="FMIN FMAX N")
@click.option("--freq-unit", type=click.Choice(FREQ_UNITS), default=DEFAULT_FREQ_UNIT, show_default=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False, path_type=Path), default=Path("out/eval.csv"))
@command_handler("eval")
def eval_command(
    run: RunContext,
    model_json: Path,
    freqs_csv: Optional[Path],
    grid: Optional[Tuple[float, float, int]],
    freq_unit: str,
    output: Path,
) -> int:
    if (freqs_csv is None) == (grid is None):
        raise DataValidationError("give exactly one of FREQS_CSV or --grid")
    model, record, document = load_model(model_json)
    freqs = load_frequencies(freqs_csv, freq_unit) if freqs_csv else grid_frequencies(grid, freq_unit)

    if isinstance(model, BarycentricModel):
        deviation = interpolation_spot_check(model, seeded_rng())
        logger.info(f"Interpolation spot check: max deviation {deviation:.3e} at random support points")

    response = denormalized_evaluator(model, record)(1j * freqs)
    write_artifacts(output.parent, {output.name: responses_csv(freqs, response, freq_unit)})
    logger.info(f"Evaluated {document.kind} model at {freqs.size} frequencies")
    return EXIT_OK


def register(cli: click.Group) -> None:
    cli.add_command(eval_command)
