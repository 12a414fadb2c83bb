"""Exception hierarchy shared by all modules."""


class RandPrefError(Exception):
    """Base class for library errors."""


class ValidationError(RandPrefError, ValueError):
    """Malformed input (prices, bundles, dimensions, probabilities)."""


class DuplicateBudgetError(ValidationError):
    """Two budgets share the same normalized price vector."""

    def __init__(self, first: int, second: int):
        self.first = first
        self.second = second
        super().__init__(
            f"budgets {first} and {second} have identical normalized prices"
        )


class OffBudgetError(ValidationError):
    """A bundle does not lie on its own budget hyperplane."""

    def __init__(self, period: int, deviation: float):
        self.period = period
        self.deviation = deviation
        super().__init__(
            f"bundle deviates from budget {period} by {deviation:.3e} "
            "(normalized expenditure minus one)"
        )


class IntersectionTieError(ValidationError):
    """A bundle lies on the intersection of two budget hyperplanes."""


class UnknownPatchError(ValidationError):
    """A bundle's sign vector does not name a patch of the partition."""


class EmptyBudgetError(ValidationError):
    """A budget has no observations."""


class ColumnCapExceeded(RandPrefError):
    """Type enumeration produced more columns than allowed."""

    def __init__(self, cap: int, partial_count: int):
        self.cap = cap
        self.partial_count = partial_count
        super().__init__(
            f"type enumeration exceeded the column cap of {cap} "
            f"({partial_count} columns generated before stopping)"
        )


class SolverError(RandPrefError):
    """A numerical solver failed (as opposed to reporting infeasibility)."""


class NotRationalizable(RandPrefError):
    """The stochastic choice vector is not in the cone of the type matrix."""


class ConfigurationError(RandPrefError):
    """Inconsistent run configuration."""
