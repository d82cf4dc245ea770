"""Exception types raised across the package."""

from __future__ import annotations


class HermiteGapError(Exception):
    """Base class for all package errors."""


class InvalidIntervalError(HermiteGapError, ValueError):
    pass


class UnsupportedOrderError(HermiteGapError, ValueError):
    pass


class DegenerateElementError(HermiteGapError, ValueError):
    pass


class DomainValidationError(HermiteGapError, ValueError):
    """A domain description violates an invariant.

    ``invariant`` names the violated property and ``witness`` is a point
    (or vertex) at which the violation was observed.
    """

    def __init__(self, invariant: str, witness=None, detail: str = ""):
        self.invariant = invariant
        self.witness = witness
        msg = f"{invariant} violated"
        if witness is not None:
            msg += f" at {witness}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class GeometryError(HermiteGapError, ValueError):
    pass


class UnsupportedDomainError(HermiteGapError, ValueError):
    pass


class ResolutionError(HermiteGapError, ValueError):
    pass


class PrecisionError(HermiteGapError, ArithmeticError):
    pass


class NotInCollarError(HermiteGapError, ValueError):
    pass


class SizeCapError(HermiteGapError, ValueError):
    pass


class NotPositiveDefiniteError(HermiteGapError, ArithmeticError):
    def __init__(self, pivot: int):
        self.pivot = pivot
        super().__init__(f"mass matrix is not positive definite (leading minor {pivot} fails)")


class WeightError(HermiteGapError, ValueError):
    pass


class BracketError(HermiteGapError, ValueError):
    pass


class ParameterError(HermiteGapError, ValueError):
    pass


class MeshError(HermiteGapError, ValueError):
    pass


class DegenerateDomainError(HermiteGapError, ValueError):
    pass
