"""Exception taxonomy shared across the package.

The CLI maps these onto process exit codes: configuration problems exit
with 2, numerical divergence with 3, failed verdicts with 1.
"""

from __future__ import annotations


class IpgObsError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(IpgObsError):
    """Invalid user-supplied setup: dimensions, identifiers, parameters."""


class DivergenceError(IpgObsError):
    """An observer run produced non-finite values or an unbounded estimate.

    Carries the sampling instant ``k`` and inner iteration ``i`` where the
    blow-up was detected.  When raised from a full run, ``partial_trace``
    and ``partial_estimates`` hold everything recorded up to that point.
    """

    def __init__(self, message, k=None, i=None):
        super().__init__(message)
        self.k = k
        self.i = i
        self.partial_trace = None
        self.partial_estimates = None


class SingularJacobianError(IpgObsError):
    """Stacked-measurement Jacobian is singular or too ill-conditioned to solve."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class NumericalEvaluationError(IpgObsError):
    """A model function returned non-finite values during evaluation."""


class InsufficientDataError(IpgObsError):
    """Not enough usable data points for a statistical operation."""
