"""Load the scenario configuration."""
import argparse
import logging
import yaml

from .errors import ConfigurationError

config = {}
"""Global configuration, the scenario document of the current run."""


def add_args(parser: argparse.ArgumentParser):
    """Add the scenario-file and output command line parameters.

    Args:
        parser (argparse.ArgumentParser): The command line parser.
    """
    parser.add_argument(
        "-c",
        "--config",
        help="Path to the JSON (or YAML) scenario file",
        dest="config",
        type=str,
        default=None,
    )
    parser.add_argument(
        "-o",
        "--out",
        help="Path of the result table. Written to stdout when omitted.",
        dest="out",
        type=str,
        default=None,
    )
    parser.add_argument(
        "--format",
        choices=["csv", "json"],
        dest="format",
        default=None,
        help="Result table format. Overrides the value from the scenario file.",
    )
    parser.add_argument(
        "--seed",
        type=int,
        dest="seed",
        default=None,
        help="Random seed. Overrides the value from the scenario file.",
    )


def read_document(path: str) -> dict:
    """Read a JSON (or YAML) scenario document.

    Raises:
        ConfigurationError: When the file does not hold a mapping.
    """
    try:
        with open(path, "r") as file:
            document = yaml.safe_load(file)
    except (OSError, yaml.YAMLError) as ex:
        raise ConfigurationError(f"Failed to load scenario path={path}: {ex}") from ex
    if not isinstance(document, dict):
        raise ConfigurationError(f"Scenario path={path} is not a mapping.")
    return document


def load_config(args: argparse.Namespace):
    """Py-rebar post-init hook to load the scenario file.

    Args:
        args (argparse.Namespace): The parsed command line.

    Raises:
        ConfigurationError: When the file named by ``--config`` cannot be read.
    """
    global config
    logger = logging.getLogger(__name__)
    path = getattr(args, "config", None)
    config = {}
    if path is None:
        logger.debug("No scenario file on the command line.")
        return
    config = read_document(path)
    logger.info("Loaded configuration file path=%s", path)


def get_config() -> dict:
    global config
    return config
