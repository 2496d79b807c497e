"""Distance at which the deformed Tsirelson bound drops to the classical value."""
from ..configuration import add_args
from ..experiments import ScenarioKind
from .common import execute_kind

SUBCOMMAND = "threshold"
ALIASES = ["thr"]
LOGGER_NAME = "eup_bell"


def config_args(parser):
    add_args(parser)


def execute(args=None) -> int:
    """Models with α >= 0 produce a ``no-threshold`` row and still exit 0."""
    return execute_kind(ScenarioKind.THRESHOLD, args)
