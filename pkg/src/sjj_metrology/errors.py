"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class CapacityError(DomainError):
    """The requested size exceeds a configured computational cap."""


class NumericalError(RuntimeError):
    """A numerical routine failed to converge or produced an invalid result."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
