class BellboundError(Exception):
    """Base class for all toolkit faults."""


class ValidationError(BellboundError, ValueError):
    """Input violates a documented invariant or precondition."""


class DimensionError(ValidationError):
    """Shapes or tensor factorizations do not match."""


class BudgetError(BellboundError):
    """Requested computation exceeds a configured size budget."""

    def __init__(self, message, required=None, budget=None):
        super().__init__(message)
        self.required = required
        self.budget = budget
