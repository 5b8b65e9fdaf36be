"""Shared exception types."""


class ValidationError(ValueError):
    """An input file or serialized document violates its schema.

    Messages name the offending file and, for line-oriented formats,
    the 1-based line number.
    """
