"""Exception hierarchy shared by every module."""


class GwpackError(Exception):
    """Base class; ``details`` carries a structured diagnostic record."""

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class DomainError(GwpackError, ValueError):
    """An argument lies outside the domain of the operation."""


class SingularityError(DomainError):
    """A focal point or zero denominator was hit."""


class ConstraintError(DomainError):
    """A required algebraic constraint between inputs is violated."""


class InfeasibleError(GwpackError):
    """A design target cannot be reached by the requested pulse family."""


class NumericError(GwpackError, ArithmeticError):
    """Quadrature, integration or truncation failed to meet its tolerance."""


class VerificationError(GwpackError):
    """An independent cross-check disagreed beyond tolerance."""
