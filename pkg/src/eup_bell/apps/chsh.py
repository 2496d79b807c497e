"""Compute deformed CHSH values and bounds, optionally swept over α, separation and widths."""
from ..configuration import add_args
from ..experiments import ScenarioKind
from .common import execute_kind

SUBCOMMAND = "chsh"
ALIASES = ["bell"]
LOGGER_NAME = "eup_bell"


def config_args(parser):
    add_args(parser)


def execute(args=None) -> int:
    return execute_kind(ScenarioKind.CHSH, args)
