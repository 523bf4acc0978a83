"""Exception hierarchy shared across the library."""

from __future__ import annotations


class QplapError(Exception):
    """Base class for all library errors."""


class FieldMismatchError(QplapError, ValueError):
    """A field does not belong to the grid it is used with, or has the wrong length."""


class ParameterError(QplapError, ValueError):
    """A scalar parameter is outside its admissible range."""


class AdmissibilityError(QplapError, ValueError):
    """Coefficient data violates an admissibility requirement (positivity, sign)."""


class DegenerateDenominatorError(QplapError, ValueError):
    """A weighted norm in a denominator is not positive."""


class DegenerateInputError(QplapError, ValueError):
    """An input field is identically zero where a nonzero field is required."""


class ConvergenceError(QplapError, RuntimeError):
    """An iterative solver exhausted its iteration budget.

    The last iterate, when available, is attached as ``last``.
    """

    def __init__(self, message: str, last=None):
        super().__init__(message)
        self.last = last


class NoSolutionError(QplapError, RuntimeError):
    """The requested object provably does not exist for the given data."""


class PreconditionError(QplapError, ValueError):
    """An operation was called on an object in the wrong state."""


class ExpressionError(QplapError, ValueError):
    """A coefficient expression failed to parse or evaluate."""


class ConfigError(QplapError, ValueError):
    """A run configuration is malformed or inconsistent."""
