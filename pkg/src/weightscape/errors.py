"""Exception types shared across the package."""


class WeightscapeError(Exception):
    """Base class for all package errors."""


class PanelError(WeightscapeError):
    """Malformed input data: shape mismatches, non-finite entries, bad metadata."""


class SingularProblemError(WeightscapeError):
    """A quadratic problem is numerically singular or indefinite.

    Carries the offending eigenvalue range so callers can report
    condition diagnostics instead of silently regularizing.
    """

    def __init__(self, message, lambda_min=None, lambda_max=None):
        super().__init__(message)
        self.lambda_min = lambda_min
        self.lambda_max = lambda_max


class DegenerateInputError(WeightscapeError):
    """A well-posed solver was handed an input for which no solution exists
    (zero right-hand side on the unit sphere, zero vector projected onto it, ...)."""


class ConvergenceError(WeightscapeError):
    """An iterative solver hit its iteration cap (cycling guard)."""
