"""Exceptions for frokaweil."""

from __future__ import annotations


class FrokaweilError(Exception):
    """Base exception for frokaweil errors."""

    pass


class InputError(FrokaweilError):
    """Raised when caller-supplied input is malformed."""

    pass


class PolynomialSyntaxError(InputError):
    """Raised when a polynomial string does not follow the grammar."""

    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} (at position {position})")
        self.position = position


class VariableRangeError(InputError):
    """Raised when a variable index falls outside 1..d."""

    pass


class AlphabetMismatchError(InputError):
    """Raised when operands live over different alphabets."""

    pass


class ShapeMismatchError(InputError):
    """Raised when matrix or tuple shapes are incompatible."""

    pass


class InvalidParameterError(InputError):
    """Raised when a scalar parameter is out of its admissible range."""

    pass


class SizeCapError(FrokaweilError):
    """Raised when a degree or word-count cap would be exceeded."""

    def __init__(self, message: str, requested: int, cap: int) -> None:
        super().__init__(f"{message}: requested {requested}, cap {cap}")
        self.requested = requested
        self.cap = cap


class StabilizationError(SizeCapError):
    """Raised when the evaluation span did not stabilize below the degree cap."""

    def __init__(self, message: str, requested: int, cap: int, ranks: list[int]) -> None:
        super().__init__(message, requested, cap)
        self.ranks = ranks


class NumericalError(FrokaweilError):
    """Base class for numerical failures."""

    pass


class NonFiniteError(NumericalError):
    """Raised when an input contains NaN or infinite entries."""

    pass


class SingularMatrixError(NumericalError):
    """Raised when a matrix that must be invertible is numerically singular."""

    def __init__(self, message: str, condition: float) -> None:
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


class NotIsometryError(NumericalError):
    """Raised when V*V deviates from the identity beyond tolerance."""

    def __init__(self, defect: float, tol: float) -> None:
        super().__init__(f"matrix is not an isometry: ||V*V - I|| = {defect:.3e} > {tol:.1e}")
        self.defect = defect


class DomainError(NumericalError):
    """Raised when a point lies outside the basic free open set."""

    def __init__(self, message: str, norm: float) -> None:
        super().__init__(f"{message} (||Q(z)|| = {norm:.12g})")
        self.norm = norm


class ColligationError(NumericalError):
    """Raised when a colligation is inconsistent or not contractive."""

    pass


class SchurBoundError(NumericalError):
    """Raised when a transfer-function value exceeds the Schur-Agler bound."""

    pass
