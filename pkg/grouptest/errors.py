"""Exceptions raised by the toolkit.

Every class derives from ``ValueError`` so callers can treat any of them as bad
input without importing this module.
"""
from typing import Optional


class GroupTestError(ValueError):
    pass


class DimensionError(GroupTestError):
    """Shapes disagree or an index falls outside the matrix."""


class MatrixFormatError(GroupTestError):
    def __init__(self, message: str, line_no: Optional[int] = None) -> None:
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class AdversaryBudgetError(GroupTestError):
    """A flip pattern leaves the column support or exceeds the budget e."""


class InstanceTooLargeError(GroupTestError):
    pass


class InfeasibleDesignError(GroupTestError):
    """The rate eta is not positive: delta has reached delta_max."""
