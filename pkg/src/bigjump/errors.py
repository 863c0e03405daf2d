"""Exception types shared across the package."""


class BigJumpError(Exception):
    """Base class for all package-specific errors."""


class DomainError(BigJumpError, ValueError):
    """An argument is outside the domain an operation accepts."""


class InvalidArg(BigJumpError, ValueError):
    """A structurally invalid argument (wrong size, wrong sign, empty)."""


class NoClosedFormTail(BigJumpError):
    """The requested quantity needs a closed-form tail this family lacks."""


class StreamExhausted(BigJumpError):
    """A caller-supplied uniform stream ran out of values."""


class MethodUnsupported(BigJumpError):
    """The estimation method cannot be applied to this configuration."""


class AllGridPointsSkipped(BigJumpError):
    """Every threshold in a grid fell below the estimable-probability floor."""


class InsufficientTailData(BigJumpError):
    """Too few tail exceedances to form the requested empirical estimate."""


class NonPositiveInterarrival(BigJumpError):
    """An inter-arrival draw was <= 0; the marginal is misconfigured."""


class PreconditionViolated(BigJumpError):
    """A scan or check was invoked outside its stated regime."""


class ParseError(BigJumpError, ValueError):
    """Config text could not be parsed."""


class ValidationError(BigJumpError, ValueError):
    """Config parsed but failed validation; message names the field."""
