"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class IcardoError(Exception):
    """Base class for every error raised by this package."""


class IngestError(IcardoError, ValueError):
    """Input data could not be turned into a Dataset."""


class SchemaMismatchError(IngestError):
    def __init__(self, message: str, column: str | None = None):
        super().__init__(message)
        self.column = column


class EmptyDatasetError(IngestError):
    pass


class RowParseError(IngestError):
    def __init__(self, message: str, row: int, column: str | None = None):
        super().__init__(message)
        self.row = row
        self.column = column


class CardinalityError(IngestError):
    def __init__(self, message: str, column: str):
        super().__init__(message)
        self.column = column


class StratificationError(IngestError):
    pass


class ShapeError(IcardoError, ValueError):
    pass


class TrainingError(IcardoError, ValueError):
    """A learner or selector could not be fit on the data it was given."""


class NumericalError(IcardoError, ArithmeticError):
    """Non-finite values or a solver that failed outright."""


class ConvergenceError(NumericalError):
    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
