"""Exception hierarchy shared by every module."""


class GeometryError(Exception):
    """Base class for all errors raised by htgeom."""


class FieldMismatchError(GeometryError, ValueError):
    """Operands live over different algebras or have incompatible shapes."""


class DomainError(GeometryError, ValueError):
    """An argument is outside the domain of an operation (e.g. inverting 0)."""


class PreconditionError(GeometryError, ValueError):
    """A documented precondition does not hold; the operation refuses to run."""


class ConvergenceError(GeometryError, RuntimeError):
    """An iterative routine hit its iteration limit."""


class PointAtInfinityError(DomainError):
    """The projective point is the one excluded from the Heisenberg chart."""


class NumericalDegeneracyError(GeometryError, ArithmeticError):
    """A post-hoc verification of a numerical decomposition failed."""
