"""The Heisenberg-type group N = F^{n-1} x Im(F).

Points are pairs ``(u, I)`` with ``u`` an algebra vector of length ``n - 1``
and ``I`` purely imaginary.  The group law is

    (u, I)(v, J) = (u + v, I + J + Im(u^* v)),

the inverse is ``(-u, -I)`` and the dilations ``(u, I) -> (l u, l^2 I)`` are
automorphisms.  Group coordinates double as exponential coordinates, so a
tangent vector (an element of the Lie algebra) has the same shape as a point.

All functions accept batched points: ``u`` may have shape ``(..., m, dim)``
with a matching ``center`` of shape ``(..., dim)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import algebra as alg
from .algebra import Field
from .errors import DomainError, FieldMismatchError, PreconditionError

RE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class NPoint:
    u: np.ndarray
    center: np.ndarray

    def __post_init__(self):
        u = np.array(self.u, dtype=float)
        c = np.array(self.center, dtype=float)
        if u.ndim < 2 or c.ndim < 1:
            raise FieldMismatchError("u must be (..., m, dim) and center (..., dim)")
        if u.shape[-1] != c.shape[-1]:
            raise FieldMismatchError("u and center live over different algebras")
        if u.shape[:-2] != c.shape[:-1]:
            raise FieldMismatchError(f"batch shapes differ: {u.shape[:-2]} vs {c.shape[:-1]}")
        field = Field.from_dim(u.shape[-1])
        m = u.shape[-2]
        if m < 1:
            raise FieldMismatchError("rank n must be at least 2")
        if field is Field.OCTONION and m != 1:
            raise FieldMismatchError("the octonionic group only exists for n = 2")
        drift = np.abs(c[..., 0])
        if np.any(drift > RE_TOL * np.maximum(1.0, alg.norm(c))):
            raise DomainError("center must be purely imaginary")
        c[..., 0] = 0.0
        u.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "center", c)

    # -- shape information --------------------------------------------------
    @property
    def field(self) -> Field:
        return Field.from_dim(self.u.shape[-1])

    @property
    def rank(self) -> int:
        return self.u.shape[-2] + 1

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.u.shape[:-2]

    def __len__(self) -> int:
        if not self.batch_shape:
            raise TypeError("single NPoint has no length")
        return self.batch_shape[0]

    def __getitem__(self, idx) -> "NPoint":
        if not self.batch_shape:
            raise TypeError("single NPoint is not indexable")
        return type(self)(self.u[idx], self.center[idx])

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, field: Field, n: int, batch: tuple[int, ...] = ()) -> "NPoint":
        return cls(np.zeros(batch + (n - 1, field.dim)), np.zeros(batch + (field.dim,)))

    @classmethod
    def from_coords(cls, coords, field: Field, n: int) -> "NPoint":
        """Inverse of ``coords``: rebuild from flat real coordinates."""
        coords = np.asarray(coords, dtype=float)
        d = field.dim
        m = n - 1
        if coords.shape[-1] != m * d + d - 1:
            raise FieldMismatchError(f"expected {m * d + d - 1} coordinates, got {coords.shape[-1]}")
        u = coords[..., : m * d].reshape(coords.shape[:-1] + (m, d))
        center = np.concatenate(
            [np.zeros(coords.shape[:-1] + (1,)), coords[..., m * d:]], axis=-1
        )
        return cls(u, center)

    @classmethod
    def random(cls, rng: np.random.Generator, field: Field, n: int, size=(), scale: float = 1.0) -> "NPoint":
        batch = (size,) if isinstance(size, int) else tuple(size)
        u = alg.random_elements(rng, field.dim, batch + (n - 1,), scale)
        c = alg.im(alg.random_elements(rng, field.dim, batch, scale))
        return cls(u, c)

    @classmethod
    def stack(cls, points: Sequence["NPoint"]) -> "NPoint":
        return cls(np.stack([p.u for p in points]), np.stack([p.center for p in points]))

    def coords(self) -> np.ndarray:
        """Flat real coordinates ``(u..., Im(I)...)``; linear chart of the Lie algebra."""
        flat_u = self.u.reshape(self.batch_shape + (-1,))
        return np.concatenate([flat_u, self.center[..., 1:]], axis=-1)

    def isclose(self, other: "NPoint", tol: float = 1e-10) -> bool:
        _check_shapes(self, other)
        return alg.close(self.u, other.u, tol) and alg.close(self.center, other.center, tol)

    def __neg__(self) -> "NPoint":
        return inverse(self)

    def to_json(self) -> dict:
        if self.batch_shape:
            raise TypeError("only single points serialize to JSON")
        return {
            "u": [[float(x) for x in row] for row in self.u],
            "center": [float(x) for x in self.center],
        }

    @classmethod
    def from_json(cls, doc: dict, field: Field | None = None, n: int | None = None) -> "NPoint":
        u = np.asarray(doc["u"], dtype=float)
        c = np.asarray(doc["center"], dtype=float)
        if u.ndim == 1:
            u = u[None, :]
        p = cls(u, c)
        if field is not None and p.field is not field:
            raise FieldMismatchError(f"point is over {p.field.symbol}, document says {field.symbol}")
        if n is not None and p.rank != n:
            raise FieldMismatchError(f"point has rank {p.rank}, document says {n}")
        return p

    def __repr__(self) -> str:
        if self.batch_shape:
            return f"NPoint({self.field.symbol}, n={self.rank}, batch={self.batch_shape})"
        return f"NPoint(u={self.u.tolist()}, center={self.center.tolist()})"


class NTangent(NPoint):
    """Lie-algebra vector ``(a, b)``; same coordinates as a point."""


def _check_shapes(x: NPoint, y: NPoint) -> None:
    if x.u.shape[-2:] != y.u.shape[-2:]:
        raise FieldMismatchError(
            f"shape mismatch: {x.field.symbol} n={x.rank} vs {y.field.symbol} n={y.rank}"
        )


# --------------------------------------------------------------------------
# Group structure

def compose(x: NPoint, y: NPoint) -> NPoint:
    """Group law ``(u + v, I + J + Im(u^* v))``."""
    _check_shapes(x, y)
    cross = alg.im(alg.hermitian(x.u, y.u))
    return NPoint(x.u + y.u, alg.im(x.center + y.center + cross))


def inverse(x: NPoint) -> NPoint:
    return NPoint(-x.u, -x.center)


def commutator(x: NPoint, y: NPoint) -> NPoint:
    """Group commutator ``(x y)(y x)^{-1}``; equals ``(0, 2 Im(u^* v))``."""
    return compose(compose(x, y), inverse(compose(y, x)))


def bracket(x: NPoint, y: NPoint) -> NPoint:
    """Lie bracket in closed form, ``[(u, I), (a, b)] = (0, 2 Im(u^* a))``."""
    _check_shapes(x, y)
    return NPoint(np.zeros(np.broadcast_shapes(x.u.shape, y.u.shape)), 2.0 * alg.im(alg.hermitian(x.u, y.u)))


def gauge_norm(x: NPoint) -> np.ndarray | float:
    """Koranyi-type gauge ``(|u|^4 + |I|^2)^(1/4)``.

    Homogeneous of degree one under dilations and subadditive for the group
    law, so ``distance`` is a genuine left-invariant metric.
    """
    val = (alg.vnorm2(x.u) ** 2 + alg.norm2(x.center)) ** 0.25
    return float(val) if np.ndim(val) == 0 else val


def sqrt_gauge_norm(x: NPoint) -> np.ndarray | float:
    """``sqrt(|u|^2 + |I|)``, the square-root gauge.

    Homogeneous under dilations, but not subadditive over C, H or O: the pair
    ``u = 1``, ``v = (2 + i)/sqrt(5)`` with zero centers already violates the
    triangle inequality.  Kept for comparison only.
    """
    val = np.sqrt(alg.vnorm2(x.u) + alg.norm(x.center))
    return float(val) if np.ndim(val) == 0 else val


def distance(x: NPoint, y: NPoint) -> np.ndarray | float:
    """Left-invariant distance ``|x^{-1} y|``.

    ``x^{-1} y = (v - u, J - I - Im(u^* v))``; the cross term is evaluated as
    ``Im(u^* (v - u))`` (equal, since ``u^* u`` is real) so that nearby points
    do not pick up roundoff of size ``|u|^2 eps`` in the center.
    """
    _check_shapes(x, y)
    du = y.u - x.u
    dc = y.center - x.center - alg.im(alg.hermitian(x.u, du))
    val = (alg.vnorm2(du) ** 2 + alg.norm2(alg.im(dc))) ** 0.25
    return float(val) if np.ndim(val) == 0 else val


def dilate(lam, x: NPoint) -> NPoint:
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr <= 0):
        raise DomainError("dilation factor must be positive")
    return NPoint(lam_arr[..., None, None] * x.u, (lam_arr**2)[..., None] * x.center)


def one_param(v: NPoint, t) -> NPoint:
    """The one-parameter subgroup ``t -> exp(t v) = (t a, t b)``."""
    t = np.asarray(t, dtype=float)
    return NPoint(t[..., None, None] * v.u, t[..., None] * v.center)


def geodesic(p: NPoint, v: NPoint, t) -> NPoint:
    """Geodesic through ``p`` with direction ``v``: ``p exp(t v)``."""
    return compose(p, one_param(v, t))


def bch_line(p: NPoint, v: NPoint, t) -> NPoint:
    """Linear-coordinate expression ``p + t v + [p, t v] / 2``."""
    tv = one_param(v, t)
    half = bracket(p, tv)
    return NPoint(p.u + tv.u, p.center + tv.center + 0.5 * half.center)


# --------------------------------------------------------------------------
# Rotations

@dataclass(frozen=True, eq=False)
class Rotation:
    """Element of the compact group M acting on N.

    Over R, C, H the action is ``(u, I) -> (P u a^{-1}, a I a^{-1})`` with
    ``P`` unitary and ``a`` a unit scalar.  Over O the rotation is a word in
    the generators ``m_mu: (x, z) -> (x mu^{-1}, mu z mu^{-1})``, applied
    left to right.
    """

    field: Field
    m: int
    P: np.ndarray | None = None
    alpha: np.ndarray | None = None
    mus: tuple = ()

    @classmethod
    def identity(cls, field: Field, n: int) -> "Rotation":
        if field is Field.OCTONION:
            return cls(field, 1)
        return cls(field, n - 1, alg.identity_matrix(field.dim, n - 1), alg.scalar(field.dim))

    @classmethod
    def unitary(cls, P, alpha=None, tol: float = 1e-10) -> "Rotation":
        P = np.array(P, dtype=float)
        if P.ndim != 3 or P.shape[0] != P.shape[1]:
            raise FieldMismatchError("P must be a square matrix of algebra elements")
        field = Field.from_dim(P.shape[-1])
        if field is Field.OCTONION:
            raise FieldMismatchError("octonionic rotations are built from unit imaginaries")
        alpha = alg.scalar(field.dim) if alpha is None else np.array(alpha, dtype=float)
        if alpha.shape != (field.dim,):
            raise FieldMismatchError("alpha must be a single algebra element")
        m = P.shape[0]
        if not alg.close(alg.matmul(alg.conj_transpose(P), P), alg.identity_matrix(field.dim, m), tol):
            raise DomainError("P is not unitary")
        if abs(alg.norm(alpha) - 1.0) > tol:
            raise DomainError("alpha must have norm 1")
        P.setflags(write=False)
        alpha.setflags(write=False)
        return cls(field, m, P, alpha)

    @classmethod
    def octonionic(cls, mus, tol: float = 1e-10) -> "Rotation":
        seq = []
        for mu in mus:
            mu = np.array(mu, dtype=float)
            if mu.shape != (8,):
                raise FieldMismatchError("mu must be an octonion")
            if abs(alg.norm(mu) - 1.0) > tol or abs(mu[0]) > tol:
                raise DomainError("mu must be a unit imaginary octonion")
            mu.setflags(write=False)
            seq.append(mu)
        return cls(Field.OCTONION, 1, mus=tuple(seq))

    @property
    def is_octonionic(self) -> bool:
        return self.field is Field.OCTONION

    def compose(self, other: "Rotation") -> "Rotation":
        """``self o other`` (apply ``other`` first)."""
        if (self.field, self.m) != (other.field, other.m):
            raise FieldMismatchError("rotations act on different groups")
        if self.is_octonionic:
            return Rotation(self.field, 1, mus=other.mus + self.mus)
        return Rotation(self.field, self.m, alg.matmul(self.P, other.P), alg.mul(self.alpha, other.alpha))

    def inverse(self) -> "Rotation":
        if self.is_octonionic:
            return Rotation(self.field, 1, mus=tuple(-mu for mu in reversed(self.mus)))
        return Rotation(self.field, self.m, alg.conj_transpose(self.P), alg.conj(self.alpha))

    def to_json(self) -> dict:
        if self.is_octonionic:
            return {"mus": [[float(x) for x in mu] for mu in self.mus]}
        return {
            "P": [[[float(x) for x in e] for e in row] for row in self.P],
            "alpha": [float(x) for x in self.alpha],
        }

    @classmethod
    def from_json(cls, doc: dict | None, field: Field, n: int) -> "Rotation":
        if not doc:
            return cls.identity(field, n)
        if "mus" in doc:
            if field is not Field.OCTONION:
                raise FieldMismatchError("mus rotations are for the octonionic case")
            return cls.octonionic(doc["mus"])
        rot = cls.unitary(doc["P"], doc.get("alpha"))
        if rot.field is not field or rot.m != n - 1:
            raise FieldMismatchError("rotation shape does not match document")
        return rot


def rotate(r: Rotation, x: NPoint) -> NPoint:
    if x.field is not r.field or x.u.shape[-2] != r.m:
        raise FieldMismatchError("rotation and point live on different groups")
    if r.is_octonionic:
        u, c = x.u, x.center
        for mu in r.mus:
            mu_inv = alg.conj(mu)
            u = alg.mul(u, mu_inv)
            c = alg.mul(alg.mul(mu, c), mu_inv)
        return NPoint(u, alg.im(c))
    a_inv = alg.inv(r.alpha)
    u = alg.mul(alg.matvec(r.P, x.u), a_inv)
    c = alg.mul(alg.mul(r.alpha, x.center), a_inv)
    return NPoint(u, alg.im(c))


def left_m_mu(mu, x: NPoint) -> NPoint:
    """``(x, z) -> (mu x, mu z mu^{-1})`` with mu multiplying on the left.

    This preserves the gauge norm but is not a group automorphism (already
    over H: ``Im((mu x)^*(mu y)) = Im(x^* y)`` is not conjugated), so it is
    not used by ``Rotation``; the right-multiplication form is.
    """
    mu = np.asarray(mu, dtype=float)
    if abs(alg.norm(mu) - 1.0) > 1e-10 or abs(mu[0]) > 1e-10:
        raise PreconditionError("mu must be a unit imaginary")
    mu_inv = alg.conj(mu)
    return NPoint(alg.mul(mu, x.u), alg.im(alg.mul(alg.mul(mu, x.center), mu_inv)))


def random_rotation(rng: np.random.Generator, field: Field, n: int, length: int = 3) -> Rotation:
    if field is Field.OCTONION:
        return Rotation.octonionic(list(alg.random_imaginary_units(rng, 8, length)))
    P = alg.random_unitary(rng, field.dim, n - 1)
    alpha = alg.random_units(rng, field.dim)
    return Rotation.unitary(P, alpha)
