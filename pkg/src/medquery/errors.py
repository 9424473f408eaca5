"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes (input/validation problems exit 2,
provider failures exit 3), and the HTTP service maps them onto status
codes, so raising the right class matters more than the message text.
"""


class MedQueryError(Exception):
    """Base class for all package errors."""


class ParseError(MedQueryError):
    """Malformed input file. Carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(MedQueryError):
    """Well-formed input that violates a domain constraint."""


class InputError(MedQueryError):
    """Bad argument to an operation (empty phrase, dims mismatch, ...)."""


class ProviderError(MedQueryError):
    """Embedding provider failure. `status` is the HTTP status when known."""

    def __init__(self, message: str, status: int | None = None):
        self.status = status
        super().__init__(message)


class FormatError(MedQueryError):
    """Corrupt or truncated binary cache. `offset` is the failing byte."""

    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)


class CacheMismatchError(MedQueryError):
    """Embedding cache does not match the vocabulary it is used with."""
