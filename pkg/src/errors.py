"""Exception hierarchy shared by every package.

Each error maps to one CLI exit code in ``main.py``: configuration, input
and load errors exit with 2, numeric failures with 3.
"""


class MailError(Exception):
    """Base class for all errors raised by this project."""


class ConfigurationError(MailError, ValueError):
    """Inconsistent configuration, shapes or hyperparameters."""


class InputError(MailError, ValueError):
    """Invalid runtime input (labels out of range, length mismatch...)."""


class NumericError(MailError, ArithmeticError):
    """A non-finite value appeared during a numerical computation."""

    def __init__(
        self,
        message: str,
        *,
        layer: int | None = None,
        step: int | None = None,
    ) -> None:
        super().__init__(message)
        self.layer = layer
        self.step = step


class ThreatModelViolationError(NumericError):
    """A generated perturbation left the allowed threat model."""


class LoadError(MailError):
    """A file could not be decoded; ``offset`` is the failing byte."""

    def __init__(self, message: str, *, offset: int | None = None) -> None:
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class ParseError(LoadError):
    """Malformed binary or text content."""


class SchemaError(LoadError):
    """Well-formed content that does not match the expected schema."""
