"""Initialize and run the eup-bell application."""
import argparse
import logging
import os.path

import pyrebar

from .apps.common import EXIT_INVALID, EXIT_OK
from .errors import ConfigurationError, UsageError

PLUGIN_PREFIX = "eupbell"
PYPROJECT = os.path.join(os.path.dirname(__file__), "..", "..", "pyproject.toml")


def _bootstrap():
    """Register the entry points from pyproject.toml when running from a source tree."""
    group = pyrebar.Plugins.groups(PLUGIN_PREFIX).app
    if not pyrebar.Plugins.entry_points().select(group=group):
        pyrebar.bootstrap_from_pyproject(PYPROJECT)


def require_subcommand(parser: argparse.ArgumentParser):
    """Py-rebar pre-init hook naming the program and rejecting a bare invocation.

    Args:
        parser (argparse.ArgumentParser): The top level command line parser.
    """
    parser.prog = "eup-bell"
    parser.description = "EUP-deformed quantum mechanics and CHSH nonlocality experiments."

    def missing_subcommand(args=None):
        parser.error("a subcommand is required")

    parser.set_defaults(func=missing_subcommand)


def cli_main(argv=None) -> int:
    """Run the app selected by ``argv``, the process arguments when None.

    Returns:
        int: 0 when every contract check passed, 1 for bad usage or an invalid
        scenario, 2 when the output contains a failed contract check.
    """
    _bootstrap()
    try:
        return pyrebar.main(argv, plugin_prefix=PLUGIN_PREFIX)
    except SystemExit as ex:
        return EXIT_OK if ex.code in (0, None) else EXIT_INVALID
    except (ConfigurationError, UsageError) as ex:
        logging.getLogger(__name__).error("%s", ex)
        return EXIT_INVALID


def run():
    return cli_main()
