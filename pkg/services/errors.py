class TverbergError(Exception):
    """Base class for everything this package raises on purpose."""


class GeometryError(TverbergError, ValueError):
    """Malformed geometric input: dimension mismatch, empty input, bad index."""


class PerfectSplitUnavailableError(GeometryError):
    """No perfect split exists for r > d + 1 (Helly forces a common point)."""


class CertificateError(TverbergError, ValueError):
    """A split certificate does not certify what it claims."""


class BudgetExceededError(TverbergError):
    """An exhaustive search would exceed its configured budget.

    Args:
        message (str): Human readable reason
        estimate (int, optional): Size of the search space that was refused
        partial (optional): Best value proven before giving up, if any
    """

    def __init__(self, message, estimate=None, partial=None):
        super().__init__(message)
        self.estimate = estimate
        self.partial = partial


class InternalInconsistencyError(TverbergError, AssertionError):
    """An exact re-verification failed. This is a bug, not bad input."""
