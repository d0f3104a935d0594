"""Exception types shared across the package."""


class ShortkernError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(ShortkernError, ValueError):
    """Operands have incompatible dimensions."""


class NotPsd(ShortkernError, ValueError):
    """A matrix violates the symmetric positive semidefinite invariant."""


class NotContraction(ShortkernError, ValueError):
    """An operator has an eigenvalue above one and cannot act as an effect."""


class DegenerateBasis(ShortkernError, ValueError):
    """Supplied spanning vectors are linearly dependent beyond tolerance."""


class IndexOutOfRange(ShortkernError, IndexError):
    """A sample-point index lies outside the feature map."""


class ScheduleExhausted(ShortkernError, LookupError):
    """An explicit effect list is shorter than the requested step."""


class EffectNotSupportedInU(ShortkernError, ValueError):
    """A trajectory effect is not supported inside the given subspace."""


class NotConverged(ShortkernError, RuntimeError):
    """The trajectory did not converge, so a limit diagnostic is undefined."""


class ConfigError(ShortkernError, ValueError):
    """Invalid or unreadable experiment configuration."""


class NumericalError(ShortkernError, ArithmeticError):
    """A numerical guarantee failed beyond its stated tolerance."""


class DegenerateFit(ShortkernError, ValueError):
    """A fitted decision boundary has no usable slope in either coordinate."""
