"""Exception types shared across the package."""


class DpLedgerError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(DpLedgerError, ValueError):
    """A numeric argument is outside its valid range."""


class CasePreconditionError(DpLedgerError, ValueError):
    """A reuse operation was invoked for a case it does not handle."""


class InsufficientBudgetError(DpLedgerError):
    """Charging the requested cost would overdraw the remaining budget."""

    def __init__(self, message: str, *, eps_squared_remaining: float):
        super().__init__(message)
        self.eps_squared_remaining = eps_squared_remaining


class CorruptHistoryError(DpLedgerError):
    """Ledger records do not form a valid reuse history."""


class LedgerIntegrityError(DpLedgerError):
    """The persisted record chain failed verification."""


class StorageError(DpLedgerError):
    """A ledger record could not be read or durably written."""


class IngestionError(DpLedgerError, ValueError):
    """The dataset bytes do not match the declared schema."""


class UnknownQueryTypeError(DpLedgerError):
    """The requested query type is not registered."""


class EvaluatorUnavailableError(DpLedgerError):
    """The dataset evaluator is disabled or unreachable."""
