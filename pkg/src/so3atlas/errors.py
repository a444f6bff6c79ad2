"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """Input outside the domain of an operation."""


class ResourceError(RuntimeError):
    """A computation would exceed its configured memory or node budget.

    ``advice`` carries the closest feasible parameter (for covers, the
    smallest epsilon that fits the budget), or None when there is none.
    """

    def __init__(self, message, advice=None):
        super().__init__(message)
        self.advice = advice
