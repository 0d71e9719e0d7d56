from __future__ import annotations


class FMeanError(Exception):
    """Base exception for f-mean operations."""

    exit_code = 1


class ValidationError(FMeanError):
    """A type invariant or operation precondition does not hold."""

    exit_code = 2


class ConfigurationError(ValidationError):
    """Scenario file or command line configuration errors."""


class DomainError(ValidationError):
    """A value lies outside the interval a mean function is defined on."""


class PreconditionError(ValidationError):
    """An operation-specific hypothesis is not satisfied."""


class NumericalError(FMeanError):
    """Numerical failure during evaluation."""

    exit_code = 3


class CodomainError(NumericalError):
    """Inversion requested for a value outside the codomain J."""

    def __init__(self, message: str, position: str = "exterior") -> None:
        super().__init__(message)
        self.position = position


class InversionError(NumericalError):
    """Numeric inversion did not reach the requested accuracy."""
