"""Exception types shared across the package.

The CLI maps these onto exit-code categories: configuration problems
(bad parameters, dimension mismatches) exit with 2, numerical failures
with 3, and I/O errors (plain OSError) with 4.
"""


class ConfigurationError(ValueError):
    """Invalid parameters, inconsistent dimensions, or a violated constraint."""


class NumericError(RuntimeError):
    """A numerical procedure failed in a way that invalidates its result."""


class CgBreakdownError(NumericError):
    """Conjugate gradients hit a non-positive curvature direction.

    Carries the partial iterate so callers can inspect how far the solve got.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
