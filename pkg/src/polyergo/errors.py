"""Exception hierarchy shared across the package."""


class PolyergoError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(PolyergoError, ValueError):
    """Vector/matrix shapes do not agree."""


class DomainError(PolyergoError, ValueError):
    """A numeric argument is outside its admissible range."""


class OrderError(PolyergoError, ValueError):
    """A sequence violates the required coordinatewise order."""


class OffGridError(PolyergoError, LookupError):
    """A point does not lie on the sample grid."""


class FormatError(PolyergoError, ValueError):
    """Data does not have the required lattice/layout structure."""


class PreconditionError(PolyergoError, ValueError):
    """A documented operation precondition is violated."""


class GuardError(PolyergoError, RuntimeError):
    """A size guard rejected the computation (pass force=True to override where supported)."""


class BudgetError(PolyergoError, RuntimeError):
    """A work budget (quadrature phase range, summation count) was exceeded."""


class ConfigError(PolyergoError, ValueError):
    """An experiment configuration is invalid."""
