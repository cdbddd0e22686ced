"""Exception types shared across the package."""


class BlowupLabError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(BlowupLabError, ValueError):
    """Input lies outside the mathematical domain of an operation.

    Raised for nonpositive levels, exponents out of range, evaluation at
    or beyond a blow-up time, and similar contract violations.
    """


class LevelOverflowError(DomainError):
    """A level exceeds the representable floating-point range.

    Distinct from a finite-time blow-up: the trajectory is perfectly
    regular, it merely left double precision (doubly exponential growth
    does this quickly).
    """


class StiffnessError(BlowupLabError, RuntimeError):
    """Adaptive step size underflowed without a threshold crossing."""


class FieldEvaluationError(BlowupLabError, RuntimeError):
    """A vector field returned a non-finite or malformed derivative."""


class InsufficientDataError(BlowupLabError, ValueError):
    """A statistical routine received fewer samples than it requires."""


class DslError(BlowupLabError, ValueError):
    """Base class for growth-law DSL failures."""


class DslSyntaxError(DslError):
    """Source text does not match the grammar.

    Carries the 1-based ``line`` and ``column`` of the offending token.
    """

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class BindingError(DslError):
    """An expression references a name with no bound value."""
