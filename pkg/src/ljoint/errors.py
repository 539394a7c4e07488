"""Exception types shared across the package."""


class LjointError(Exception):
    """Base class for all package errors."""


class DomainError(LjointError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ValidationError(LjointError, ValueError):
    """Structured input failed a consistency check."""


class BudgetError(LjointError):
    """A request would exceed a hard computational budget."""


class SearchFailure(LjointError):
    """A bounded search exhausted its range without finding a witness."""


class StateError(LjointError):
    """An operation was requested on an object lacking the needed state."""
