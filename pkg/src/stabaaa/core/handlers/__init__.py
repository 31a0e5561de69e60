import click

from .compare import register as register_compare_handlers
from .evaluate import register as register_eval_handlers
from .export import register as register_export_handlers
from .fit import register as register_fit_handlers
from .poles import register as register_poles_handlers


def setup_handlers(cli: click.Group) -> None:
    register_fit_handlers(cli)
    register_eval_handlers(cli)
    register_poles_handlers(cli)
    register_compare_handlers(cli)
    register_export_handlers(cli)
