"""Semantic exception hierarchy shared across the package."""

from __future__ import annotations


class AhpRankError(Exception):
    """Base class for all domain errors raised by this package."""


class MatrixValidationError(AhpRankError):
    """A raw comparison matrix failed structural validation."""


class NonSquareError(MatrixValidationError):
    pass


class NegativeEntryError(MatrixValidationError):
    """An entry is negative or not a finite real number."""

    def __init__(self, i: int, j: int, value: float):
        self.i, self.j, self.value = i, j, value
        super().__init__(f"entry ({i},{j}) = {value!r} is not a finite nonnegative value")


class BadDiagonalError(MatrixValidationError):
    def __init__(self, i: int, value: float):
        self.i, self.value = i, value
        super().__init__(f"diagonal entry ({i},{i}) = {value!r}, expected 1")


class OneSidedComparisonError(MatrixValidationError):
    def __init__(self, i: int, j: int):
        self.i, self.j = i, j
        super().__init__(f"pair ({i},{j}) is compared in one orientation only")


class ReciprocityViolationError(MatrixValidationError):
    def __init__(self, i: int, j: int, product: float):
        self.i, self.j, self.product = i, j, product
        super().__init__(
            f"entries ({i},{j}) and ({j},{i}) are not reciprocal: product = {product!r}"
        )


class ParseError(AhpRankError):
    """Malformed matrix or weight text input."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line, self.column = line, column
        where = ""
        if line is not None:
            where = f" at line {line}" + (f", column {column}" if column is not None else "")
        super().__init__(message + where)


class DisconnectedError(AhpRankError):
    """The comparison graph is not connected; no method applies."""


class CycleExplosionError(AhpRankError):
    """Cycle enumeration exceeded its cap; callers should fall back to the exact solver."""

    def __init__(self, cap: int):
        self.cap = cap
        super().__init__(f"more than {cap} elementary cycles; falling back to the exact solver")


class NotEligibleError(AhpRankError):
    """The certified fast path was invoked outside its eligibility conditions."""

    def __init__(self, reasons: tuple[str, ...]):
        self.reasons = reasons
        super().__init__("fast path not eligible: " + "; ".join(reasons))


class NoConvergenceError(AhpRankError):
    """An iterative solver exhausted its iteration budget."""


class MaxIterationsError(NoConvergenceError):
    pass


class SingularSystemError(AhpRankError):
    """A linear system was rank deficient beyond its known gauge freedom."""


class NonPositiveWeightsError(AhpRankError):
    """Ratio-based metrics require strictly positive weights."""


class InfeasibleDensityError(AhpRankError):
    """Requested graph density cannot produce a connected simple graph."""


class SaatyRangeWarning(UserWarning):
    """A present ratio lies outside the conventional [1/9, 9] scale."""


class TieBreakWarning(UserWarning):
    """The tie penalty coefficient exceeds the bound that keeps it negligible."""
