"""Exception types shared across the package."""


class SnwitnessError(Exception):
    """Base class for all errors raised by this package."""


class BadParameter(SnwitnessError):
    """An argument is outside its documented range."""


class NonFinite(SnwitnessError):
    """A matrix or vector contains NaN or Inf entries."""


class NotHermitian(SnwitnessError):
    """A matrix required to be Hermitian is not, beyond tolerance."""


class MetricNotPSD(SnwitnessError):
    """The metric of a generalized eigenproblem has a negative eigenvalue."""


class DegenerateMetric(SnwitnessError):
    """The metric of a generalized eigenproblem has numerical rank zero."""


class DimensionMismatch(SnwitnessError):
    """Operator and state dimensions are incompatible."""


class ZeroState(SnwitnessError):
    """A state vector vanished (or fell below the absolute threshold)."""


class NotReal(SnwitnessError):
    """An expectation value carries an imaginary part beyond tolerance."""


class TooSmall(SnwitnessError):
    """The operator is too small for the requested computation."""


class RankTooHigh(SnwitnessError):
    """A state has a larger Schmidt rank than the computation admits."""


class NoConvergence(SnwitnessError):
    """An iterative solver produced no usable iterate."""


class ConfigInvalid(SnwitnessError):
    """A run configuration failed validation."""
