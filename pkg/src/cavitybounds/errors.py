"""Exception hierarchy shared by the library and the CLI."""


class CavityBoundsError(Exception):
    """Base class for all library errors."""


class DomainError(CavityBoundsError, ValueError):
    """An argument lies outside the domain of the operation."""


class InvalidDistributionError(CavityBoundsError, ValueError):
    """Samples are non-finite, negative, or the grid does not cover [0, 1]."""


class DegenerateDistributionError(InvalidDistributionError):
    """u vanishes on an initial interval, so the running integral in J is zero there."""


class BrillouinViolationError(CavityBoundsError, ValueError):
    """A distribution exceeds u = 1 somewhere on [0, 1]."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ConvergenceError(CavityBoundsError, RuntimeError):
    """A numerical optimizer or root finder failed to converge."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
