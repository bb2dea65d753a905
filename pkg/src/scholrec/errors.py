"""Shared exception types."""


class ScholrecError(Exception):
    """Base class for all scholrec errors."""


class ValidationError(ScholrecError):
    """Input violates a documented invariant."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class ParseError(ValidationError):
    """Malformed input that could not be decoded at all."""


class DuplicateIdError(ValidationError):
    """Two corpus records share the same id."""


class EmptyQueryError(ScholrecError):
    """Reference document yields no terms known to the index."""
