"""Shared exception types."""


class DomainError(ValueError):
    """A precondition on mathematical input is violated."""


class BudgetError(RuntimeError):
    """An enumeration would exceed the configured work budget."""


class EstimationError(RuntimeError):
    """Census rows are inconsistent with a mu*q^d growth model.

    Carries a human-readable diagnostic in args[0] and the offending
    data in the ``details`` attribute.
    """

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details
