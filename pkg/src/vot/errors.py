"""Exception hierarchy shared by all vot modules."""
from __future__ import annotations


class VotError(Exception):
    """Base class for all errors raised by this package."""


class ProblemFormatError(VotError):
    """Malformed input file: bad JSON, missing field, or wrong type.

    Carries human-readable location context (line/column for JSON syntax
    errors, field path for schema errors).
    """


class DimensionMismatchError(VotError):
    """Shapes of weights, supports, or cost blocks do not line up."""


class MeasureValidationError(VotError):
    """A measure failed validation where a valid one is required."""


class MassMismatchError(VotError):
    """Total masses of two measures differ beyond tolerance."""


class OracleSizeError(VotError):
    """Flattened instance exceeds the brute-force oracle size limit."""


class MiddleMarginalError(VotError):
    """Plans passed to the gluing composition disagree on the shared
    middle marginal."""
