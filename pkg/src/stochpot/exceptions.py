"""Exception hierarchy.

Every error raised by the package derives from :class:`StochpotError` so a
caller can catch the whole family at once.  Argument-type errors also derive
from ``ValueError`` to play well with generic validation code.
"""


class StochpotError(Exception):
    """Base class for all package errors."""


class InvalidArgument(StochpotError, ValueError):
    """A parameter is outside its admissible range."""


class UnsupportedGeometry(StochpotError, ValueError):
    """The (domain, measure kind) pair has no discretization."""


class SingularKernel(StochpotError, ValueError):
    """A kernel was evaluated at a point where it diverges."""


class NonPointwiseKernel(StochpotError, ValueError):
    """A distributional kernel (white noise) was evaluated pointwise."""


class InadmissibleKernel(StochpotError, ValueError):
    """The kernel fails the continuity test required for sampling."""


class NonDifferentiableKernel(StochpotError, ValueError):
    """A derivative covariance was requested from a kernel without one."""


class FactorizationFailure(StochpotError, ArithmeticError):
    """The covariance matrix could not be factorized even with jitter."""


class ResourceLimit(StochpotError, MemoryError):
    """The requested dense problem exceeds the configured size cap."""


class InvalidPairing(StochpotError, ValueError):
    """Objects that must share a grid do not."""


class OutOfDomain(StochpotError, ValueError):
    """An evaluation point lies outside the admissible region."""


class SingularPoint(StochpotError, ValueError):
    """A function was evaluated at one of its singularities."""


class IllConditionedStep(StochpotError, ValueError):
    """A finite-difference step is too small to be meaningful."""


class InvalidComparison(StochpotError, ValueError):
    """Two functions that should share boundary values do not."""


class InvalidOrder(StochpotError, ValueError):
    """A Riesz order is not strictly below the ambient dimension."""


class EmbeddingViolation(StochpotError, ValueError):
    """Exponents violate a*p < n, so no finite Lebesgue exponent exists."""


class ChartSingularity(StochpotError, ValueError):
    """A curvilinear metric factor is singular at the requested point."""


class InvalidCurve(StochpotError, ValueError):
    """An open curve was passed where a closed loop is required."""


class MissingConstant(StochpotError, ValueError):
    """A noise constant is neither derivable from the kernel nor supplied."""
