"""Exception types shared across the package."""

from __future__ import annotations


class SymcalcError(Exception):
    """Base class for all errors raised by symcalc."""


class DomainError(SymcalcError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class ConstraintError(SymcalcError, ValueError):
    """An angular (l, m) component violates an orthogonality constraint."""

    def __init__(self, message: str, offending: tuple[int, int] | None = None):
        super().__init__(message)
        self.offending = offending


class TruncationError(SymcalcError, ValueError):
    """More asymptotic orders were requested than the inputs carry."""


class NumericError(SymcalcError, ArithmeticError):
    """A quadrature or linear solve did not reach its tolerance."""

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved


class ResourceError(SymcalcError, RuntimeError):
    """A requested computation would exceed the configured size bound."""

    def __init__(self, message: str, projected: int | None = None):
        super().__init__(message)
        self.projected = projected


class DiagramSyntaxError(SymcalcError, ValueError):
    """Malformed diagram text; carries a 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ArityError(SymcalcError, ValueError):
    """A diagram node has the wrong number of children for its kind."""
