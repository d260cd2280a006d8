"""Exception hierarchy shared by all solver components."""


class L0TopoError(Exception):
    """Base class for errors raised by this package."""


class InvalidArgument(L0TopoError, ValueError):
    pass


class UnsupportedOperation(L0TopoError):
    pass


class UnsupportedSize(L0TopoError):
    pass


class NumericalBreakdown(L0TopoError, RuntimeError):
    pass


class NonConvergence(L0TopoError, RuntimeError):
    """Iterative solver gave up; ``residual`` holds the last residual."""

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class InfeasibleControl(L0TopoError, ValueError):
    pass


class EmptyResidual(L0TopoError):
    """Raised when a selection is requested for an identically zero residual."""
