"""Exception hierarchy.

Validation problems derive from ``ValueError``; numerical breakdowns derive
from :class:`NumericalError` so callers (and the CLI) can tell them apart.
"""


class ModelError(ValueError):
    """Model parameters violate an invariant."""


class DomainError(ValueError):
    """Argument outside the domain of an operation."""


class DegenerateRoots(ValueError):
    """Root set has a double root (q = 0 with zero mean)."""


class AbscissaTooSmall(ValueError):
    """Laplace variable too small for the price transform (need Phi(p) > 1)."""


class NumericalError(ArithmeticError):
    """Base class for numerical failures."""


class BracketFailure(NumericalError):
    def __init__(self, message, interval=None):
        super().__init__(message if interval is None else f"{message} on interval {interval}")
        self.interval = interval


class ConvergenceError(NumericalError):
    pass


class InversionUnstable(NumericalError):
    def __init__(self, message, value=None, error_estimate=None):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate


class ScaleOverflow(NumericalError, OverflowError):
    """Scale function would overflow; use the log-scaled variants."""
