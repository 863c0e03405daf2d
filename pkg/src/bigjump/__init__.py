"""Desk-scale verification lab for heavy-tailed rare events: partial sums,
random sums, reinsurance functionals and ruin probabilities under weak
orthant dependence, with certified closed-form references wherever they
exist and deterministic, replayable simulation everywhere else."""

from . import counting, dependence, deviation, diagnostics, harness, marginals, risk
from .errors import (AllGridPointsSkipped, BigJumpError, DomainError,
                     InsufficientTailData, InvalidArg, MethodUnsupported,
                     NoClosedFormTail, NonPositiveInterarrival, ParseError,
                     PreconditionViolated, StreamExhausted, ValidationError)
from .streams import substream

__version__ = "0.1.0"

__all__ = [
    "counting", "dependence", "deviation", "diagnostics", "harness",
    "marginals", "risk", "substream",
    "AllGridPointsSkipped", "BigJumpError", "DomainError",
    "InsufficientTailData", "InvalidArg", "MethodUnsupported",
    "NoClosedFormTail", "NonPositiveInterarrival", "ParseError",
    "PreconditionViolated", "StreamExhausted", "ValidationError",
]
