"""Exception types shared across the package."""


class NngpError(Exception):
    """Base class for all package errors."""


class NotPositiveDefinite(NngpError, ValueError):
    """A matrix that must be positive definite failed to factor."""


class DimensionMismatch(NngpError, ValueError):
    pass


class ConvergenceFailure(NngpError, RuntimeError):
    pass


class InvalidCorrelation(NngpError, ValueError):
    """A correlation triple does not define a positive-definite matrix."""


class InvalidPermutation(NngpError, ValueError):
    pass
