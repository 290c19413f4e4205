"""Exception types raised across the package."""


class DomainError(ValueError):
    """A probability or parameter lies outside its admissible range."""


class DistributionKindError(TypeError):
    """The operation is not defined for this kind of state distribution."""


class ConfigError(ValueError):
    """A distribution or run configuration could not be parsed."""


class BoundTooWideError(RuntimeError):
    """A certified bracket could not be narrowed to the requested width.

    The best bracket reached is kept on the exception so callers can still
    report it.
    """

    def __init__(self, message, lower, upper, n_bins):
        super().__init__(message)
        self.lower = lower
        self.upper = upper
        self.n_bins = n_bins


class UnsupportedModeError(ValueError):
    """The requested CSI regime is not supported by this operation."""


class ReproductionError(RuntimeError):
    """Key reproduction failed its integrity check."""
