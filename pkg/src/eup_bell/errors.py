"""Exceptions raised by the toolkit."""


class EupBellError(Exception):
    """Base class of every error raised by this package."""


class ConfigurationError(EupBellError, ValueError):
    """Invalid grid, model or scenario parameters."""


class UnsupportedConfigurationError(ConfigurationError):
    """A configuration the library recognizes but does not implement."""


class ScenarioValidationError(ConfigurationError):
    """Aggregated scenario validation failure.

    Args:
        problems (list[str]): One message per offending parameter.
    """

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__(
            f"Scenario validation failed with {len(self.problems)} problem(s): "
            + "; ".join(self.problems)
        )


class DomainError(EupBellError, ValueError):
    """A state that lies outside the domain an operation is valid on."""


class UsageError(EupBellError, ValueError):
    """Misuse of the API or the command line (mismatched grids, bad axes)."""


class NumericalConsistencyError(EupBellError, ArithmeticError):
    """A numerical result violating a property it must satisfy."""


class InvalidStateError(EupBellError, ValueError):
    """A density matrix that is not a valid two-qubit state."""


class InvalidWeightsError(InvalidStateError):
    """Bell-diagonal weights outside the probability simplex."""
