"""Export command.

This module contains the ``export`` subcommand. By default it converts a barycentric model document to
pole-residue form; with ``--sdpa`` it rebuilds the model's stability program from the dataset it was
fitted on and writes it in SDPA sparse format.
"""

import io
from pathlib import Path
from typing import Optional

import click

from ...config.paths import DEFAULT_OUTPUT_DIR, POLE_RESIDUE_FILE, SDPA_FILE
from ...config.settings import DEFAULT_FREQ_UNIT, EXIT_OK, FREQ_UNITS
from ...phrases import export_help, sdpa_help
from ...services.backends import SdpSettings
from ...services.barycentric import BarycentricModel, pole_residue
from ...services.datamodel import apply_normalization, load_dataset
from ...services.export import dumps, load_model, model_document, write_artifacts
from ...services.pipeline import rebuild_stability_sdp
from ...services.sdp import write_sdpa
from ...services.stabaaa import PoleResidueModel
from ...utils.hash import dataset_sha256
from ..dependencies import RunContext
from ..errors import DataValidationError
from .decorators import command_handler


@click.command("export", help=export_help)
@click.argument("model_json", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--sdpa", "sdpa_data", type=click.Path(exists=True, dir_okay=False, path_type=Path), help=sdpa_help)
@click.option("--freq-unit", type=click.Choice(FREQ_UNITS), default=DEFAULT_FREQ_UNIT, show_default=True)
@click.option("-o", "--output", type=click.Path(file_okay=False, path_type=Path), default=DEFAULT_OUTPUT_DIR)
@command_handler("export")
def export_command(run: RunContext, model_json: Path, sdpa_data: Optional[Path], freq_unit: str, output: Path) -> int:
    model, record, document = load_model(model_json)
    if not isinstance(model, BarycentricModel):
        raise DataValidationError(f"export needs a barycentric model, got a {document.kind} document")

    if sdpa_data is not None:
        raw = load_dataset(sdpa_data, freq_unit)
        if dataset_sha256(raw) != document.dataset_sha256:
            raise DataValidationError("dataset fingerprint differs from the one stored in the model")
        program = rebuild_stability_sdp(model, apply_normalization(raw, record), SdpSettings())
        buffer = io.StringIO()
        write_sdpa(program, buffer)
        write_artifacts(output, {SDPA_FILE: buffer.getvalue()})
        return EXIT_OK

    if model.k == 0:
        converted = PoleResidueModel(model.values[:0], model.values[:0], model.constant)
    else:
        ps = pole_residue(model)
        converted = PoleResidueModel(ps.finite_poles, ps.residues, ps.constant)
    exported = model_document(converted, record, document.dataset_sha256, document.algorithm, document.diagnostics)
    write_artifacts(output, {POLE_RESIDUE_FILE: dumps(exported)})
    return EXIT_OK


def register(cli: click.Group) -> None:
    cli.add_command(export_command)
