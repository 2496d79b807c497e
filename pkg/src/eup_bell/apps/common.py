"""Shared execution path of the scenario apps."""
import argparse
import logging

from ..configuration import get_config
from ..errors import ConfigurationError, UsageError
from ..experiments import (
    ResultTable,
    Scenario,
    ScenarioKind,
    run_scenario,
    scenario_from_dict,
    with_overrides,
    write_table,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_CONTRACT_FAILURE = 2


def scenario_for(kind: ScenarioKind, args: argparse.Namespace) -> Scenario:
    """The configured scenario for ``kind`` with command line overrides applied.

    Raises:
        UsageError: When ``kind`` needs a scenario file and none was loaded.
    """
    document = get_config()
    if document:
        scenario = scenario_from_dict(document, kind)
    elif kind is ScenarioKind.VERIFY_ALGEBRA:
        scenario = Scenario(kind)
    else:
        raise UsageError(f"{kind.value} needs a scenario file, pass --config.")
    return with_overrides(
        scenario,
        seed=getattr(args, "seed", None),
        out=getattr(args, "out", None),
        fmt=getattr(args, "format", None),
    )


def summarize(table: ResultTable) -> str:
    s = table.scenario
    line = f"kind={s.kind.value} seed={s.seed} rows={len(table.frame)} passed={table.passed}"
    if s.output_path is not None:
        line += f" out={s.output_path}"
    return line


def execute_kind(kind: ScenarioKind, args: argparse.Namespace) -> int:
    """Run one scenario kind and write its table.

    Returns:
        int: 0 when every contract check passed, 1 for invalid input, 2 when a
        contract check failed.
    """
    logger = logging.getLogger(__name__)
    try:
        scenario = scenario_for(kind, args)
        table = run_scenario(scenario)
    except (ConfigurationError, UsageError) as ex:
        logger.error("Invalid %s scenario: %s", kind.value, ex)
        return EXIT_INVALID

    write_table(table)
    quiet = getattr(args, "log_level", None) == "CRITICAL"
    if not quiet and scenario.output_path is not None:
        print(summarize(table))

    if not table.passed:
        logger.warning("Contract check failed kind=%s, seed=%d", kind.value, scenario.seed)
        return EXIT_CONTRACT_FAILURE
    return EXIT_OK
