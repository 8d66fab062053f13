"""Exception and warning types shared across the package."""


class OverlapLabError(Exception):
    """Base class for all package errors."""


class ContractError(OverlapLabError, ValueError):
    """A precondition of an operation was violated."""


class ConfigError(OverlapLabError, ValueError):
    """Malformed or inconsistent run configuration."""


class ResourceBudgetError(OverlapLabError, RuntimeError):
    """An enumeration would exceed its configured node budget."""

    def __init__(self, needed, budget, what="enumeration"):
        self.needed = needed
        self.budget = budget
        super().__init__(f"{what} needs {needed} nodes, budget is {budget}")


class UnsupportedStructureError(OverlapLabError, ValueError):
    """The system lacks the structure a closed form requires."""


class NumericalWarning(UserWarning):
    """Estimator noise or an ambiguous numerical situation."""
