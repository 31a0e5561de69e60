"""Exception hierarchy for stabaaa.

This module contains the errors raised by the services. Every error carries the CLI exit code
it maps to, so handlers never need a lookup table of their own.
"""

from typing import Any, Dict, Optional

from ..config.settings import EXIT_NUMERICAL, EXIT_VALIDATION


class StabAaaError(Exception):
    """Base class of all library errors."""

    exit_code: int = EXIT_NUMERICAL


class DataValidationError(StabAaaError, ValueError):
    """Input data or flags violate a precondition."""

    exit_code = EXIT_VALIDATION


class CsvParseError(DataValidationError):
    """A CSV row could not be parsed."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class SchemaError(DataValidationError):
    """A JSON document does not match the expected schema."""


class DegenerateDataError(StabAaaError, ValueError):
    """Data carry no usable information for the requested operation."""

    exit_code = EXIT_VALIDATION


class NumericalError(StabAaaError, ArithmeticError):
    """A numerical kernel failed."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics: Dict[str, Any] = dict(diagnostics or {})


class ConditioningError(NumericalError):
    """A matrix is too close to singular for the requested operation."""


class PoleEvaluationError(NumericalError):
    """The barycentric denominator vanished away from the support points."""


class EigenSolverError(NumericalError):
    """The generalized eigensolver failed."""


class SdpNumericalError(NumericalError):
    """The interior-point iteration broke down."""


class SaturationError(StabAaaError):
    """The AAA test set is exhausted."""


class SdpInfeasibleError(StabAaaError):
    """The stability program has no feasible point."""


class StabilizationError(StabAaaError):
    """Stability enforcement failed; carries the last unconstrained model."""

    def __init__(self, message: str, model: Any = None):
        super().__init__(message)
        self.model = model
