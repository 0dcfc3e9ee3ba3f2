"""
Exception hierarchy shared by all toolkit modules.

Validation failures are returned as reports; exceptions signal refused
preconditions, unparseable input, or internal inconsistencies.
"""

from typing import Optional


class TildeCKError(Exception):
    """Base class for every error raised by the toolkit."""


class ParseError(TildeCKError, ValueError):
    """Input file does not match its grammar."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class DomainError(TildeCKError, ValueError):
    """An operation was called outside its precondition."""


class UnsupportedOrderError(DomainError):
    """A projective plane order the toolkit does not construct or search."""


class ValidationRequiredError(TildeCKError, RuntimeError):
    """An unvalidated object was passed where validation is mandatory."""


class ConditionRefusedError(TildeCKError, RuntimeError):
    """A computation was refused because an H-condition is not satisfied."""

    def __init__(self, condition: str, message: str):
        self.condition = condition
        super().__init__(f"{condition}: {message}")


class InternalConsistencyError(TildeCKError, RuntimeError):
    """A uniqueness or cross-check failed; indicates a construction defect."""
