"""Exception hierarchy shared by every engine."""


class TourProdError(Exception):
    """Base class for all package errors."""


class DomainError(TourProdError, ValueError):
    """An argument lies outside the mathematical domain of a function."""


class DegenerateError(TourProdError, ZeroDivisionError):
    """A partial correlation has a vanishing denominator."""


class UnsupportedError(TourProdError, NotImplementedError):
    """The requested quantity has no formula in this engine."""


class ConvergenceError(TourProdError, RuntimeError):
    """A quadrature did not reach its tolerance within the subdivision limit."""


class SeriesDivergenceError(ConvergenceError):
    """The three-step Bessel series failed to settle before ``k_max``."""


class IllConditionedFitError(TourProdError, ValueError):
    """Extrapolation grid is too clustered for a stable polynomial fit."""


class InvalidCovarianceError(TourProdError, ValueError):
    """A covariance matrix has a materially negative eigenvalue."""
