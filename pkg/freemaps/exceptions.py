"""
Exceptions for the freemaps package.
"""
from typing import Any, Optional


class FreeMapsError(Exception):
    """Base exception for all freemaps errors."""

    pass


class DimensionError(FreeMapsError):
    """Raised when matrix shapes or tuple sizes are inconsistent."""

    pass


class NotHermitianError(FreeMapsError):
    """Raised when a matrix is not Hermitian within tolerance."""

    pass


class SingularMatrixError(FreeMapsError):
    """Raised when a matrix is not invertible at this point."""

    pass


class ArityError(FreeMapsError):
    """Raised when a variable index or tuple length does not match the arity."""

    pass


class ExpressionSyntaxError(FreeMapsError):
    """Raised when an expression string does not match the grammar."""

    def __init__(self, message: str, position: int, source: str = ""):
        self.position = position
        self.source = source
        super().__init__(f"{message} at position {position}")


class EvaluationError(FreeMapsError):
    """Raised when an expression cannot be evaluated at a point."""

    def __init__(self, message: str, node: Optional[Any] = None):
        self.node = node
        super().__init__(message)


class NotNilpotentError(FreeMapsError):
    """Raised when a matrix expected to be nilpotent is not."""

    pass


class BranchCutError(FreeMapsError):
    """Raised when an elliptic integral is requested on its branch cut."""

    pass


class ConvergenceError(FreeMapsError):
    """Raised when an iteration fails to converge."""

    def __init__(self, message: str, last: Any = None):
        self.last = last
        super().__init__(message)


class WitnessStageError(FreeMapsError):
    """Raised when one stage of the ellipse witness pipeline fails."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")


class FormatError(FreeMapsError):
    """Raised when an input file does not follow the expected JSON format."""

    pass


class PreconditionError(FreeMapsError):
    """Raised when a map or point does not meet an operation's precondition."""

    pass
