"""Exception types shared across qws."""


class QwsError(Exception):
    """Base class for all qws errors."""


class GraphError(QwsError, ValueError):
    """Invalid graph or constructor parameters."""


class GraphParseError(GraphError):
    """Malformed graph file or constructor expression."""


class ExactArithmeticLimit(QwsError):
    """Exact computation requested outside its supported range."""


class PreconditionError(QwsError, ValueError):
    """An operation was called on input that violates its precondition."""


class NumericalFailure(QwsError, ArithmeticError):
    """Eigensolver failure or a numeric verification that did not hold."""


class ConfigError(QwsError, ValueError):
    """Invalid analysis configuration."""


class SearchBudgetExceeded(QwsError):
    """A backtracking search ran past its node budget."""
