"""Exception hierarchy shared across the package."""


class GSDError(Exception):
    """Base class for all errors raised by gsdst."""


class DimensionError(GSDError, ValueError):
    """Operand shapes do not fit the operation."""


class InvalidDecompositionError(GSDError, ValueError):
    """Zero initial term, zero ratio, or duplicate ratios."""


class InsufficientSamplesError(GSDError, ValueError):
    """The sequence is too short for the requested index pattern."""

    def __init__(self, required_index: int, length: int):
        self.required_index = required_index
        self.length = length
        super().__init__(
            f"index {required_index} required but sequence has only {length} samples"
        )


class DegenerateSimplexError(GSDError, ArithmeticError):
    """Reference simplex volume is numerically zero."""


class DetectionError(GSDError, RuntimeError):
    """No candidate order produced a geometric volume series."""


class InconsistencyError(GSDError, RuntimeError):
    """The recovered decomposition does not reproduce the input."""


class InfeasibleError(GSDError, ValueError):
    """Not enough candidate quotient vectors to compare."""
