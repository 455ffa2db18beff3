"""Exceptions raised by todacurve."""


class TodaCurveError(Exception):
    """Base class for all package errors."""


class DegenerateInvariant(TodaCurveError, ValueError):
    """A determinant g_k or u_k is too close to zero for a division."""


class DegenerateSum(TodaCurveError, ValueError):
    """g_{k-1} + g_k vanishes, so V-entries cannot be converted to (alpha, beta)."""


class UnsupportedSize(TodaCurveError, ValueError):
    """Closed-form bracket relations need more than three sites."""


class SolverFailure(TodaCurveError, RuntimeError):
    pass


class DegeneracyCrossing(TodaCurveError, RuntimeError):
    """An integrated trajectory hit a degenerate state."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class GenerationFailure(TodaCurveError, RuntimeError):
    pass
