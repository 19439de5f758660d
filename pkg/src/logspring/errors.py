"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class PreconditionError(ValueError):
    """Structured input violates a documented precondition."""


class WindowError(DomainError):
    """Time lies outside a declared coefficient validity window."""


class ScheduleError(ValueError):
    """Mass/stiffness schedule is inconsistent or nonpositive."""


class StepSizeError(RuntimeError):
    """Adaptive integration step collapsed below the resolvable size."""


class MappingError(ValueError):
    """Coefficients do not map onto an oscillatory regime."""


class FitError(RuntimeError):
    """Least-squares fit could not be completed."""


class QuadratureError(RuntimeError):
    """Numerical quadrature failed to reach the requested accuracy."""
