"""Arithmetic in the normed division algebras R, C, H and O.

Elements are stored as real coefficient arrays whose last axis has length
``dim`` (1, 2, 4 or 8); coefficient 0 is the real part.  Every kernel in this
module broadcasts over leading axes, so a batch of 10^4 octonions is just an
array of shape ``(10000, 8)``.

Multiplication follows the Cayley-Dickson doubling rule

    (a, b)(c, d) = (ac - d*b, da + bc*)

applied recursively R -> C -> H -> O.  The rule is evaluated once on basis
elements to produce a structure-constant tensor, which is what ``mul`` uses.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import DomainError, FieldMismatchError

DEFAULT_TOL = 1e-12


class Field(Enum):
    REAL = 1
    COMPLEX = 2
    QUATERNION = 4
    OCTONION = 8

    @property
    def dim(self) -> int:
        return self.value

    @property
    def symbol(self) -> str:
        return {1: "R", 2: "C", 4: "H", 8: "O"}[self.value]

    @property
    def associative(self) -> bool:
        return self is not Field.OCTONION

    @classmethod
    def from_dim(cls, dim: int) -> "Field":
        try:
            return cls(int(dim))
        except ValueError:
            raise FieldMismatchError(f"no division algebra of dimension {dim}") from None

    @classmethod
    def parse(cls, name: "str | Field") -> "Field":
        if isinstance(name, Field):
            return name
        key = str(name).strip().upper()
        aliases = {
            "R": cls.REAL, "REAL": cls.REAL,
            "C": cls.COMPLEX, "COMPLEX": cls.COMPLEX,
            "H": cls.QUATERNION, "QUATERNION": cls.QUATERNION,
            "O": cls.OCTONION, "OCTONION": cls.OCTONION,
        }
        if key not in aliases:
            raise FieldMismatchError(f"unknown field tag {name!r}")
        return aliases[key]


def close(a, b, tol: float = DEFAULT_TOL) -> bool:
    """Absolute-plus-relative comparison used throughout the package."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = max(1.0, float(np.max(np.abs(a), initial=0.0)), float(np.max(np.abs(b), initial=0.0)))
    return bool(np.all(np.abs(a - b) <= tol * scale))


# --------------------------------------------------------------------------
# Cayley-Dickson construction

def _cd_conj(a: np.ndarray) -> np.ndarray:
    out = -a
    out[..., 0] = a[..., 0]
    return out


def cayley_dickson_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Multiply by direct recursion on the doubling rule (slow, reference path)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = a.shape[-1]
    if n == 1:
        return a * b
    h = n // 2
    p, q = a[..., :h], a[..., h:]
    r, s = b[..., :h], b[..., h:]
    first = cayley_dickson_mul(p, r) - cayley_dickson_mul(_cd_conj(s), q)
    second = cayley_dickson_mul(s, p) + cayley_dickson_mul(q, _cd_conj(r))
    return np.concatenate([first, second], axis=-1)


def _build_table(dim: int) -> np.ndarray:
    eye = np.eye(dim)
    table = cayley_dickson_mul(eye[:, None, :], eye[None, :, :])
    table = np.rint(table)  # entries are exactly 0 or +-1
    table.setflags(write=False)
    return table


_TABLES: dict[int, np.ndarray] = {d: _build_table(d) for d in (1, 2, 4, 8)}


def structure_constants(field: Field | int) -> np.ndarray:
    """Tensor ``T`` with ``e_i e_j = sum_k T[i, j, k] e_k``."""
    dim = field.dim if isinstance(field, Field) else int(field)
    return _TABLES[dim]


def multiplication_table(field: Field = Field.OCTONION) -> list[list[str]]:
    """Human-readable basis table, rows ``e_i``, columns ``e_j``, entry ``e_i e_j``."""
    table = structure_constants(field)
    dim = field.dim
    rows = []
    for i in range(dim):
        row = []
        for j in range(dim):
            k = int(np.flatnonzero(table[i, j])[0])
            sign = "-" if table[i, j, k] < 0 else "+"
            row.append(f"{sign}e{k}")
        rows.append(row)
    return rows


# --------------------------------------------------------------------------
# Array kernels

def _dims(*arrays: np.ndarray) -> int:
    dims = {a.shape[-1] for a in arrays}
    if len(dims) != 1:
        raise FieldMismatchError(f"operands have different algebra dimensions {sorted(dims)}")
    dim = dims.pop()
    if dim not in _TABLES:
        raise FieldMismatchError(f"no division algebra of dimension {dim}")
    return dim


def mul(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    dim = _dims(a, b)
    if dim == 1:
        return a * b
    return np.einsum("...i,...j,ijk->...k", a, b, _TABLES[dim])


def conj(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    out = -a
    out[..., 0] = a[..., 0]
    return out


def re(a) -> np.ndarray:
    """Real part as a plain real array (the coefficient axis is dropped)."""
    return np.asarray(a, dtype=float)[..., 0]


def im(a) -> np.ndarray:
    out = np.array(a, dtype=float)
    out[..., 0] = 0.0
    return out


def norm2(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return np.sum(a * a, axis=-1)


def norm(a) -> np.ndarray:
    return np.sqrt(norm2(a))


def inv(a) -> np.ndarray:
    n2 = norm2(a)
    if np.any(n2 == 0.0):
        raise DomainError("inverse of zero")
    return conj(a) / n2[..., None]


def rscale(a, t) -> np.ndarray:
    return np.asarray(a, dtype=float) * np.asarray(t, dtype=float)[..., None]


def hermitian(u, v) -> np.ndarray:
    """``sum_k conj(u_k) v_k`` for vectors shaped ``(..., m, dim)``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    _dims(u, v)
    if u.shape[-2] != v.shape[-2]:
        raise FieldMismatchError(f"vector lengths differ: {u.shape[-2]} vs {v.shape[-2]}")
    return np.sum(mul(conj(u), v), axis=-2)


def vnorm2(u) -> np.ndarray:
    """Squared Euclidean norm of an algebra vector ``(..., m, dim)``."""
    u = np.asarray(u, dtype=float)
    return np.sum(u * u, axis=(-2, -1))


def matmul(A, B) -> np.ndarray:
    """Matrix product over the algebra: ``(..., p, q, d) x (..., q, r, d)``."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    dim = _dims(A, B)
    if A.shape[-2] != B.shape[-3]:
        raise FieldMismatchError(f"cannot multiply {A.shape[-3:-1]} by {B.shape[-3:-1]}")
    if dim == 1:
        return np.einsum("...ijp,...jkp->...ikp", A, B)
    return np.einsum("...ijp,...jkq,pqr->...ikr", A, B, _TABLES[dim])


def matvec(A, v) -> np.ndarray:
    """``A v`` with ``A`` shaped ``(..., p, q, d)`` and ``v`` shaped ``(..., q, d)``."""
    return matmul(A, np.asarray(v, dtype=float)[..., :, None, :])[..., 0, :]


def conj_transpose(A) -> np.ndarray:
    return np.swapaxes(conj(A), -3, -2)


def identity_matrix(dim: int, size: int) -> np.ndarray:
    out = np.zeros((size, size, dim))
    out[np.arange(size), np.arange(size), 0] = 1.0
    return out


def scalar(dim: int, x: float = 1.0) -> np.ndarray:
    out = np.zeros(dim)
    out[0] = x
    return out


def basis(dim: int, k: int) -> np.ndarray:
    out = np.zeros(dim)
    out[k] = 1.0
    return out


# --------------------------------------------------------------------------
# Random sampling helpers (used by tests, the verify battery and the CLI)

def random_elements(rng: np.random.Generator, dim: int, size=(), scale: float = 1.0) -> np.ndarray:
    shape = (size,) if isinstance(size, int) else tuple(size)
    return scale * rng.standard_normal(shape + (dim,))


def random_imaginary_units(rng: np.random.Generator, dim: int, size=()) -> np.ndarray:
    if dim == 1:
        raise DomainError("R has no imaginary units")
    x = im(random_elements(rng, dim, size))
    return x / norm(x)[..., None]


def random_units(rng: np.random.Generator, dim: int, size=()) -> np.ndarray:
    x = random_elements(rng, dim, size)
    return x / norm(x)[..., None]


def gram_schmidt(columns: np.ndarray) -> np.ndarray:
    """Orthonormalize the columns of ``(m, m, dim)`` for the form ``u^* v``.

    Only valid for associative algebras; coefficients multiply on the right.
    """
    cols = np.array(columns, dtype=float)
    m = cols.shape[0]
    out = np.zeros_like(cols)
    for k in range(m):
        v = cols[:, k, :]
        for j in range(k):
            e = out[:, j, :]
            coef = hermitian(e, v)
            v = v - mul(e, coef[None, :])
        nv = np.sqrt(vnorm2(v))
        if nv < 1e-12:
            raise DomainError("columns are linearly dependent")
        out[:, k, :] = v / nv
    return out


def random_unitary(rng: np.random.Generator, dim: int, m: int) -> np.ndarray:
    """Haar-ish random ``m x m`` unitary over R, C or H."""
    if dim == 8:
        raise DomainError("no unitary matrix group over O in this package")
    return gram_schmidt(rng.standard_normal((m, m, dim)))


# --------------------------------------------------------------------------
# Value type

@dataclass(frozen=True, eq=False)
class AlgElem:
    """An immutable element of R, C, H or O."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.ndim != 1:
            raise FieldMismatchError("AlgElem holds a single element; use raw arrays for batches")
        Field.from_dim(c.shape[0])
        if not np.all(np.isfinite(c)):
            raise DomainError("non-finite coefficient")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def of(cls, field: Field, *coeffs: float) -> "AlgElem":
        c = np.zeros(field.dim)
        c[: len(coeffs)] = coeffs
        return cls(c)

    @property
    def tag(self) -> Field:
        return Field.from_dim(self.coeffs.shape[0])

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, AlgElem):
            if other.tag is not self.tag:
                raise FieldMismatchError(f"{self.tag.name} vs {other.tag.name}")
            return other.coeffs
        return scalar(self.tag.dim, float(other))

    def __add__(self, other):
        return AlgElem(self.coeffs + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return AlgElem(self.coeffs - self._coerce(other))

    def __rsub__(self, other):
        return AlgElem(self._coerce(other) - self.coeffs)

    def __neg__(self):
        return AlgElem(-self.coeffs)

    def __mul__(self, other):
        if isinstance(other, AlgElem):
            return AlgElem(mul(self.coeffs, self._coerce(other)))
        return AlgElem(self.coeffs * float(other))

    def __rmul__(self, other):
        return AlgElem(self.coeffs * float(other))

    def __truediv__(self, t):
        return AlgElem(self.coeffs / float(t))

    def conj(self) -> "AlgElem":
        return AlgElem(conj(self.coeffs))

    def re(self) -> float:
        return float(self.coeffs[0])

    def im(self) -> "AlgElem":
        return AlgElem(im(self.coeffs))

    def norm(self) -> float:
        return float(norm(self.coeffs))

    def inv(self) -> "AlgElem":
        return AlgElem(inv(self.coeffs))

    def isclose(self, other: "AlgElem", tol: float = DEFAULT_TOL) -> bool:
        return self.tag is other.tag and close(self.coeffs, other.coeffs, tol)

    def to_json(self) -> list[float]:
        return [float(x) for x in self.coeffs]

    @classmethod
    def from_json(cls, data: Sequence[float], field: Field | None = None) -> "AlgElem":
        elem = cls(np.asarray(data, dtype=float))
        if field is not None and elem.tag is not field:
            raise FieldMismatchError(f"expected {field.dim} coefficients, got {len(data)}")
        return elem

    def __repr__(self) -> str:
        return f"AlgElem({self.tag.symbol}, {list(self.coeffs)})"
