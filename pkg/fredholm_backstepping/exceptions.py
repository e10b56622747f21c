"""
Exception hierarchy of fredholm_backstepping.

Every error raised on purpose by the package derives from BacksteppingError,
so callers can catch the whole family at once; the concrete classes also
derive from the matching builtin (ValueError, TypeError) where one exists.
"""

from typing import Iterable, Optional


class BacksteppingError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(BacksteppingError, ValueError):
    """A precondition on an argument does not hold (sizes, ranges, grids)."""


class ConfigError(BacksteppingError, ValueError):
    """The configuration file is malformed or names unknown keys."""


class UnsupportedKernelError(BacksteppingError, TypeError):
    """The operation is only defined for a narrower kernel class (XOnly)."""


class NotControllableError(BacksteppingError):
    """
    The Fattorini criterion fails, so no control (and no kernel) exists.

    The failing eigenvalue indices are kept on the exception.
    """

    def __init__(self, message: str, indices: Optional[Iterable[int]] = None):
        super().__init__(message)
        self.indices = sorted(indices or ())


class DegenerateSpectrumError(BacksteppingError):
    """lambda_0 collides with some lambda_k, or the Gram system is singular."""


class SingularTransformError(BacksteppingError):
    """Id - K is not invertible at the requested tolerance."""

    def __init__(self, message: str, sigma_min: Optional[float] = None):
        super().__init__(message)
        self.sigma_min = sigma_min
