"""
stabaaa - Main Entry Point

This module contains the command-line entry point. It builds the click group with the global flags,
registers the subcommand handlers and maps every failure to the documented exit codes.
"""

import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional

import click

from .config.settings import EXIT_INTERRUPTED, EXIT_NUMERICAL, EXIT_VALIDATION
from .core.dependencies import RunContext
from .core.handlers import setup_handlers
from .phrases import cli_help
from .utils.log import setup_logging

logger = logging.getLogger(__name__)


@contextmanager
def _usage_errors_as_validation() -> Iterator[None]:
    try:
        yield
    except click.UsageError as e:
        e.exit_code = EXIT_VALIDATION
        raise


class StabAaaGroup(click.Group):
    """Click group whose usage errors exit with the validation code instead of click's 2.

    Ctrl-C exits with 130 rather than click's abort code 1.
    """

    def make_context(self, *args, **kwargs) -> click.Context:
        with _usage_errors_as_validation():
            return super().make_context(*args, **kwargs)

    def invoke(self, ctx: click.Context):
        with _usage_errors_as_validation():
            try:
                return super().invoke(ctx)
            except KeyboardInterrupt:
                logger.info("Stopped by user")
                raise click.exceptions.Exit(EXIT_INTERRUPTED)


@click.group(cls=StabAaaGroup, help=cli_help, context_settings={"help_option_names": ["-h", "--help"]})
@click.option("-v", "--verbose", is_flag=True, help="Log DEBUG messages.")
@click.option("-q", "--quiet", is_flag=True, help="Log warnings and errors only.")
@click.option(
    "--trace",
    "trace_path",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Append AAA iterations as JSON lines to this file.",
)
@click.option("--no-normalize", is_flag=True, help="Fit the raw data without max-magnitude normalization.")
@click.version_option(package_name="stabaaa")
@click.pass_context
def cli(ctx: click.Context, verbose: bool, quiet: bool, trace_path: Optional[Path], no_normalize: bool) -> None:
    setup_logging(verbose=verbose, quiet=quiet)
    ctx.obj = RunContext(verbose=verbose, quiet=quiet, trace_path=trace_path, normalize=not no_normalize)


setup_handlers(cli)


def run_with_error_handling() -> None:
    """Run the command line with comprehensive error handling."""
    try:
        cli.main(prog_name="stabaaa")

    except KeyboardInterrupt:
        logger.info("Stopped by user")
        sys.exit(EXIT_INTERRUPTED)

    except Exception as e:
        logger.critical(f"Critical error: {e}")
        sys.exit(EXIT_NUMERICAL)


if __name__ == "__main__":
    run_with_error_handling()
