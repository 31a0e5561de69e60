"""Command handler decorators for the stabaaa command line.

This module contains @command_handler, which gives every subcommand the same contract: the wrapped
function receives the RunContext and returns an exit code; library errors are logged, printed as a
framed message and converted into the exit code their class declares.
"""

import logging
from functools import wraps
from typing import Callable

import click
import numpy as np

from ...config.settings import EXIT_CODE_NAMES, EXIT_NUMERICAL, EXIT_OK
from ...utils.formatters import format_error_message
from ..dependencies import get_run_context
from ..errors import StabAaaError, StabilizationError

logger = logging.getLogger(__name__)


def command_handler(command: str) -> Callable:
    """Decorator for standardized subcommand handling.

    Args:
        command: Subcommand name shown in the framed error message.

    Returns:
        Decorated click callback that exits with the handler's code.
    """

    def decorator(func: Callable[..., int]) -> Callable[..., None]:
        @wraps(func)
        def wrapper(*args, **kwargs) -> None:
            run = get_run_context()
            try:
                code = func(run, *args, **kwargs)
            except StabAaaError as e:
                code = e.exit_code
                _report(command, e)
                if isinstance(e, StabilizationError) and e.model is not None:
                    logger.info(f"Last unconstrained model had k={getattr(e.model, 'k', '?')}")
            except (np.linalg.LinAlgError, FloatingPointError) as e:
                code = EXIT_NUMERICAL
                _report(command, e)
            code = EXIT_OK if code is None else int(code)
            logger.debug(f"{command} finished with exit code {code} ({EXIT_CODE_NAMES.get(code, 'unknown')})")
            click.get_current_context().exit(code)

        return wrapper

    return decorator


def _report(command: str, error: Exception) -> None:
    logger.error(f"{command} failed: {error}")
    click.echo(format_error_message(command, error), err=True)
