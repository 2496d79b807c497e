"""Sweep the deformed uncertainty relation over Gaussian packets on a 3D grid."""
from ..configuration import add_args
from ..experiments import ScenarioKind
from .common import execute_kind

SUBCOMMAND = "uncertainty-sweep"
ALIASES = ["uncertainty"]
LOGGER_NAME = "eup_bell"


def config_args(parser):
    add_args(parser)


def execute(args=None) -> int:
    return execute_kind(ScenarioKind.UNCERTAINTY_SWEEP, args)
