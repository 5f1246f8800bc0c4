"""Exception types shared across the package."""


class EvidenceLabError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(EvidenceLabError, ValueError):
    """A parameter is outside its admissible range."""


class SchemaError(EvidenceLabError, ValueError):
    """An input stream does not conform to the documented schema."""


class InsufficientDataError(EvidenceLabError):
    """A record or collection lacks the data required for an operation."""


class DegenerateEffectError(EvidenceLabError, ValueError):
    """An effect-size conversion hit a boundary (|r| >= 1 or w >= 1)."""


class NumericsError(EvidenceLabError, ArithmeticError):
    """A numerical routine failed to converge."""
