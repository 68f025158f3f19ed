"""Exception types raised across the package."""


class QboundError(Exception):
    """Base class for all package errors."""


class InvalidDimensionError(QboundError, ValueError):
    pass


class NotAStateError(QboundError, ValueError):
    pass


class ValidationError(QboundError, ValueError):
    pass


class NeedsRefinementError(ValidationError):
    """A matrix handed to a rank-1 constructor has rank > 1."""


class UndefinedOperationError(QboundError, ValueError):
    pass


class DomainError(QboundError, ValueError):
    pass


class PreconditionError(QboundError, ValueError):
    pass


class InfeasibleError(QboundError):
    """The requested program or parametrization has no feasible point."""


class SolverError(QboundError):
    """The conic solver did not reach the requested accuracy."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or {}


class OptimizationFailedError(QboundError):
    pass


class DecompositionError(QboundError, RuntimeError):
    """Recursion guard tripped while decomposing a POVM."""
