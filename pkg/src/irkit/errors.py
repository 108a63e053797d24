"""Exception types shared across the toolkit."""

from __future__ import annotations


class ValidationError(Exception):
    """Raised when input data violates a format rule or domain invariant.

    Carries optional file/line context so command-line errors can name the
    offending location.
    """

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None and line is not None:
            where = f"{path}:{line}: "
        elif path is not None:
            where = f"{path}: "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(f"{where}{message}")


class ParseError(ValidationError):
    """A file could not be parsed at all (malformed syntax)."""
