"""Poles command.

This module contains the ``poles`` subcommand, which writes the pole/zero map of a saved model.
"""

from pathlib import Path

import click

from ...config.paths import DEFAULT_OUTPUT_DIR, POLES_CSV_FILE, POLES_FILE
from ...config.settings import EXIT_OK
from ...phrases import poles_help
from ...services.export import dumps, load_model, poles_csv, poles_document, write_artifacts
from ...services.pipeline import model_poles
from ..dependencies import RunContext
from .decorators import command_handler


@click.command("poles", help=poles_help)
@click.argument("model_json", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("-o", "--output", type=click.Path(file_okay=False, path_type=Path), default=DEFAULT_OUTPUT_DIR)
@command_handler("poles")
def poles_command(run: RunContext, model_json: Path, output: Path) -> int:
    model, _, document = load_model(model_json)
    pole_map = poles_document(model_poles(model), document.dataset_sha256)
    write_artifacts(output, {POLES_FILE: dumps(pole_map), POLES_CSV_FILE: poles_csv(pole_map)})
    return EXIT_OK


def register(cli: click.Group) -> None:
    cli.add_command(poles_command)
