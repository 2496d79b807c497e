"""Verify the deformed operator algebra symbolically, magnetic couplings included."""
from ..configuration import add_args
from ..experiments import ScenarioKind
from .common import execute_kind

SUBCOMMAND = "verify-algebra"
ALIASES = ["algebra"]
LOGGER_NAME = "eup_bell"


def config_args(parser):
    add_args(parser)


def execute(args=None) -> int:
    """Runs without a scenario file, using α̃ = 0 and a field along x̂³."""
    return execute_kind(ScenarioKind.VERIFY_ALGEBRA, args)
