"""Exception types shared across the package."""


class FracBurgersError(Exception):
    """Base class for all package errors."""


class ConfigurationError(FracBurgersError, ValueError):
    """Invalid parameters, shapes or configuration keys."""


class NumericalFailure(FracBurgersError, ArithmeticError):
    """A NaN or Inf appeared in the solution state."""


class DegenerateFitError(FracBurgersError):
    """Too few usable data points to fit a model."""


class FitFailure(FracBurgersError):
    """An optimizer did not converge.

    The best iterate found is kept on ``best`` so callers can still inspect it.
    """

    def __init__(self, message, best=None, index=None):
        super().__init__(message)
        self.best = best
        self.index = index
