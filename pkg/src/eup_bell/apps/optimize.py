"""Maximize the deformed CHSH value over settings and compare with the closed-form bound."""
from ..configuration import add_args
from ..experiments import ScenarioKind
from .common import execute_kind

SUBCOMMAND = "optimize"
ALIASES = ["opt"]
LOGGER_NAME = "eup_bell"


def config_args(parser):
    add_args(parser)


def execute(args=None) -> int:
    return execute_kind(ScenarioKind.OPTIMIZE, args)
