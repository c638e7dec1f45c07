"""Heisenberg-type groups, their similarities, and the boundary of hyperbolic space."""
from .algebra import AlgElem, Field
from .errors import (
    ConvergenceError,
    DomainError,
    FieldMismatchError,
    GeometryError,
    NumericalDegeneracyError,
    PointAtInfinityError,
    PreconditionError,
)
from .heisenberg import NPoint, Rotation
from .similarity import Similarity

__version__ = "0.1.0"

__all__ = [
    "AlgElem",
    "ConvergenceError",
    "DomainError",
    "Field",
    "FieldMismatchError",
    "GeometryError",
    "NPoint",
    "NumericalDegeneracyError",
    "PointAtInfinityError",
    "PreconditionError",
    "Rotation",
    "Similarity",
]
