"""Exception hierarchy shared by the gasket, expression and fractal modules.

Every error carries an ``exit_code`` so the command-line front end can map
failures onto its documented exit status without a lookup table.
"""

from __future__ import annotations


class FractalError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 3


# -- gasket -----------------------------------------------------------------


class OutOfCell(FractalError):
    """A point does not lie in the requested sub-triangle."""


class NotOnGasket(FractalError):
    """No cell of the requested depth contains the point."""


class DepthTooLarge(FractalError):
    """A lattice depth above the supported maximum was requested."""

    def __init__(self, depth: int, limit: int) -> None:
        super().__init__(f"depth exceeds {limit} (got {depth})")
        self.depth = depth
        self.limit = limit


class NegativeDepth(FractalError):
    """A lattice or cell depth below zero was requested."""

    def __init__(self, depth: int) -> None:
        super().__init__(f"depth must be non-negative (got {depth})")
        self.depth = depth


# -- expressions ------------------------------------------------------------


class ExpressionError(FractalError):
    exit_code = 2


class ExpressionSyntaxError(ExpressionError):
    """Malformed expression text; ``position`` is the 0-based offset."""

    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} at offset {position}")
        self.position = position


class UnknownIdentifier(ExpressionError):
    def __init__(self, name: str, position: int) -> None:
        super().__init__(f"unknown identifier {name!r} at offset {position}")
        self.name = name
        self.position = position


class DomainError(ExpressionError):
    """A function was evaluated outside its real domain."""


class UnknownFigure(ExpressionError):
    def __init__(self, figure) -> None:
        super().__init__(f"unknown figure {figure!r}; expected 1, 2, 3 or 4")
        self.figure = figure


class InvalidArgument(ExpressionError):
    """A command argument (scale vector, address, corner) is malformed."""


class BadAddress(InvalidArgument):
    """An address string contains letters other than 1, 2 and 3."""


# -- fractal ----------------------------------------------------------------


class ValidationError(FractalError):
    pass


class ScaleOutOfRange(ValidationError):
    def __init__(self, norm: float) -> None:
        super().__init__(f"scale vector max-norm {norm!r} is not below 1")
        self.norm = norm


class IncompatibleBase(ValidationError):
    """The base function does not agree with ``f`` on the corner vertices."""

    def __init__(self, vertex: int, deviation: float, tol: float) -> None:
        super().__init__(
            f"base differs from f at V_0 vertex x_{vertex} by {deviation!r} "
            f"(tolerance {tol!r})"
        )
        self.vertex = vertex
        self.deviation = deviation
        self.tol = tol


class ConsistencyFailure(ValidationError):
    def __init__(self, level: int, spread: float, tol: float) -> None:
        super().__init__(
            f"shared-vertex values disagree by {spread!r} at level {level} "
            f"(tolerance {tol!r})"
        )
        self.level = level
        self.spread = spread
        self.tol = tol


__all__ = [
    "FractalError",
    "OutOfCell",
    "NotOnGasket",
    "DepthTooLarge",
    "NegativeDepth",
    "ExpressionError",
    "ExpressionSyntaxError",
    "UnknownIdentifier",
    "DomainError",
    "UnknownFigure",
    "InvalidArgument",
    "BadAddress",
    "ValidationError",
    "ScaleOutOfRange",
    "IncompatibleBase",
    "ConsistencyFailure",
]
