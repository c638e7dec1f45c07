"""Projective model of the boundary of hyperbolic space over R, C or H.

Vectors of F^{n+1} carry the hermitian form of signature (n, 1).  In the
canonical basis E it is ``|z_1|^2 + ... + |z_n|^2 - |z_{n+1}|^2``; in the null
basis F,

    f_1 = (-e_1 + e_{n+1}) / sqrt 2,   f_k = e_k,   f_{n+1} = (e_1 + e_{n+1}) / sqrt 2,

it becomes ``|w_2|^2 + ... + |w_n|^2 - 2 Re(w_1 w_{n+1}^*)``.  Points of
projective space are lines ``[v] = {v s : s in F*}``; scalars act on the right.

The Heisenberg chart sends ``(u, I)`` to ``[1, u, |u|^2/2 + I]`` in basis F, so
``0`` corresponds to ``[f_1]`` and the excluded point ``[f_{n+1}]`` is infinity.
Octonions are rejected here: O^3 is not a vector space.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from . import algebra as alg
from .algebra import Field
from .errors import (
    DomainError,
    FieldMismatchError,
    NumericalDegeneracyError,
    PointAtInfinityError,
    PreconditionError,
)
from .heisenberg import NPoint, Rotation
from .similarity import Similarity

ISOMETRY_TOL = 1e-9
BOUNDARY_TOL = 1e-9
SQRT_HALF = np.sqrt(0.5)


class Basis(Enum):
    E = "E"
    F = "F"


class PointKind(Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    EXTERIOR = "exterior"


def _require_field(dim: int) -> Field:
    field = Field.from_dim(dim)
    if field is Field.OCTONION:
        raise FieldMismatchError("the projective model is only built over R, C and H")
    return field


def gram(field: Field, n: int, basis: Basis) -> np.ndarray:
    """Gram matrix ``J`` with ``Q(v) = v^* J v``, as an algebra matrix."""
    J = np.zeros((n + 1, n + 1, field.dim))
    if basis is Basis.E:
        J[np.arange(n), np.arange(n), 0] = 1.0
        J[n, n, 0] = -1.0
    else:
        J[np.arange(1, n), np.arange(1, n), 0] = 1.0
        J[0, n, 0] = -1.0
        J[n, 0, 0] = -1.0
    return J


def change_matrix(field: Field, n: int) -> np.ndarray:
    """Real matrix whose columns are the F basis vectors written in E."""
    S = np.zeros((n + 1, n + 1, field.dim))
    S[0, 0, 0] = -SQRT_HALF
    S[n, 0, 0] = SQRT_HALF
    S[np.arange(1, n), np.arange(1, n), 0] = 1.0
    S[0, n, 0] = SQRT_HALF
    S[n, n, 0] = SQRT_HALF
    return S


@dataclass(frozen=True, eq=False)
class ProjVec:
    coords: np.ndarray
    basis: Basis = Basis.E

    def __post_init__(self):
        c = np.array(self.coords, dtype=float)
        if c.ndim != 2 or c.shape[0] < 3:
            raise FieldMismatchError("ProjVec needs n + 1 >= 3 algebra coordinates")
        _require_field(c.shape[-1])
        if not np.any(c):
            raise DomainError("the zero vector is not a projective point")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)
        object.__setattr__(self, "basis", Basis(self.basis))

    @property
    def field(self) -> Field:
        return Field.from_dim(self.coords.shape[-1])

    @property
    def n(self) -> int:
        return self.coords.shape[0] - 1

    def in_basis(self, basis: Basis) -> "ProjVec":
        return self if basis is self.basis else change_basis(self)

    def normalized(self) -> "ProjVec":
        """Right-divide by the coordinate of largest norm (lowest index on ties)."""
        k = int(np.argmax(alg.norm(self.coords)))
        return ProjVec(alg.mul(self.coords, alg.inv(self.coords[k])[None, :]), self.basis)

    def scaled(self, s) -> "ProjVec":
        return ProjVec(alg.mul(self.coords, np.asarray(s, dtype=float)[None, :]), self.basis)

    def to_json(self) -> dict:
        return {"basis": self.basis.value, "coords": [[float(x) for x in e] for e in self.coords]}


@dataclass(frozen=True, eq=False)
class GroupElem:
    matrix: np.ndarray
    basis: Basis = Basis.E
    check: bool = True

    def __post_init__(self):
        g = np.array(self.matrix, dtype=float)
        if g.ndim != 3 or g.shape[0] != g.shape[1] or g.shape[0] < 3:
            raise FieldMismatchError("GroupElem needs an (n+1) x (n+1) algebra matrix with n >= 2")
        _require_field(g.shape[-1])
        g.setflags(write=False)
        object.__setattr__(self, "matrix", g)
        object.__setattr__(self, "basis", Basis(self.basis))
        if self.check and not is_isometry(self):
            raise DomainError("matrix does not preserve the hermitian form")

    @property
    def field(self) -> Field:
        return Field.from_dim(self.matrix.shape[-1])

    @property
    def n(self) -> int:
        return self.matrix.shape[0] - 1

    def in_basis(self, basis: Basis) -> "GroupElem":
        return self if basis is self.basis else change_basis(self)

    def __matmul__(self, other: "GroupElem") -> "GroupElem":
        other = other.in_basis(self.basis)
        return GroupElem(alg.matmul(self.matrix, other.matrix), self.basis, check=False)

    def inverse(self) -> "GroupElem":
        J = gram(self.field, self.n, self.basis)
        inv = alg.matmul(alg.matmul(J, alg.conj_transpose(self.matrix)), J)
        return GroupElem(inv, self.basis, check=False)

    def to_json(self) -> dict:
        return {
            "field": self.field.symbol,
            "n": self.n,
            "basis": self.basis.value,
            "matrix": [[[float(x) for x in e] for e in row] for row in self.matrix],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "GroupElem":
        g = cls(np.asarray(doc["matrix"], dtype=float), Basis(doc.get("basis", "E")))
        if "field" in doc and Field.parse(doc["field"]) is not g.field:
            raise FieldMismatchError("matrix entries do not match the field tag")
        if "n" in doc and int(doc["n"]) != g.n:
            raise FieldMismatchError("matrix size does not match n")
        return g

    @classmethod
    def identity(cls, field: Field, n: int, basis: Basis = Basis.E) -> "GroupElem":
        return cls(alg.identity_matrix(field.dim, n + 1), basis)


def is_isometry(g: GroupElem, tol: float = ISOMETRY_TOL) -> bool:
    J = gram(g.field, g.n, g.basis)
    lhs = alg.matmul(alg.matmul(alg.conj_transpose(g.matrix), J), g.matrix)
    return alg.close(lhs, J, tol)


def change_basis(obj):
    """Rewrite a ProjVec or GroupElem in the other basis."""
    field = obj.field
    n = obj.n
    S = change_matrix(field, n)
    St = np.swapaxes(S, 0, 1)
    if isinstance(obj, ProjVec):
        to_e = obj.basis is Basis.F
        coords = alg.matvec(S if to_e else St, obj.coords)
        return ProjVec(coords, Basis.E if to_e else Basis.F)
    if isinstance(obj, GroupElem):
        if obj.basis is Basis.F:
            m = alg.matmul(alg.matmul(S, obj.matrix), St)
            return GroupElem(m, Basis.E, check=False)
        m = alg.matmul(alg.matmul(St, obj.matrix), S)
        return GroupElem(m, Basis.F, check=False)
    raise TypeError(f"cannot change basis of {type(obj).__name__}")


def q_eval(v: ProjVec) -> float:
    J = gram(v.field, v.n, v.basis)
    return float(alg.re(alg.hermitian(v.coords, alg.matvec(J, v.coords))))


def classify_point(v: ProjVec, tol: float = BOUNDARY_TOL) -> PointKind:
    q = q_eval(v) / float(alg.vnorm2(v.coords))
    if q < -tol:
        return PointKind.INTERIOR
    if q > tol:
        return PointKind.EXTERIOR
    return PointKind.BOUNDARY


def chordal_distance(v: ProjVec, w: ProjVec) -> float:
    """Sine of the angle between two lines; independent of scaling.

    Computed as the norm of the residual of ``a`` after projecting on ``b``
    (unit representatives) rather than ``sqrt(1 - |<b, a>|^2)``, which loses
    half the digits near 0.
    """
    w = w.in_basis(v.basis)
    a = v.coords / np.sqrt(alg.vnorm2(v.coords))
    b = w.coords / np.sqrt(alg.vnorm2(w.coords))
    r = a - alg.mul(b, alg.hermitian(b, a)[None, :])
    return float(np.sqrt(alg.vnorm2(r)))


def projectively_close(v: ProjVec, w: ProjVec, tol: float = 1e-9) -> bool:
    return chordal_distance(v, w) <= tol


# --------------------------------------------------------------------------
# Named points and subgroup constructors

def origin(field: Field, n: int) -> ProjVec:
    """The interior point "0" = [e_{n+1}]."""
    c = np.zeros((n + 1, field.dim))
    c[n, 0] = 1.0
    return ProjVec(c, Basis.E)


def minus_one(field: Field, n: int) -> ProjVec:
    """The boundary point "-1" = [f_1]; chart image of 0."""
    c = np.zeros((n + 1, field.dim))
    c[0, 0] = 1.0
    return ProjVec(c, Basis.F)


def infinity(field: Field, n: int) -> ProjVec:
    """The boundary point "1" = [f_{n+1}]; the point at infinity of the chart."""
    c = np.zeros((n + 1, field.dim))
    c[n, 0] = 1.0
    return ProjVec(c, Basis.F)


def mk_k(k_prime) -> GroupElem:
    """``diag(k', 1)`` in basis E, ``k'`` unitary of size n."""
    k_prime = np.asarray(k_prime, dtype=float)
    n, dim = k_prime.shape[0], k_prime.shape[-1]
    _require_field(dim)
    g = np.zeros((n + 1, n + 1, dim))
    g[:n, :n] = k_prime
    g[n, n, 0] = 1.0
    return GroupElem(g, Basis.E)


def mk_m(m_prime, alpha) -> GroupElem:
    """``diag(alpha, alpha m', alpha)`` in basis F."""
    m_prime = np.asarray(m_prime, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    m, dim = m_prime.shape[0], m_prime.shape[-1]
    _require_field(dim)
    n = m + 1
    g = np.zeros((n + 1, n + 1, dim))
    g[0, 0] = alpha
    g[n, n] = alpha
    g[1:n, 1:n] = alg.mul(alpha[None, None, :], m_prime)
    return GroupElem(g, Basis.F)


def mk_a(t: float, field: Field, n: int) -> GroupElem:
    """``diag(e^{-t}, 1, ..., 1, e^t)`` in basis F."""
    g = alg.identity_matrix(field.dim, n + 1)
    g[0, 0, 0] = np.exp(-t)
    g[n, n, 0] = np.exp(t)
    return GroupElem(g, Basis.F)


def mk_n(u, I) -> GroupElem:
    """Heisenberg translation matrix in basis F.

    Rows: ``(1, 0, 0)``, ``(u, E, 0)``, ``(|u|^2/2 + I, u^*, 1)``.
    """
    u = np.asarray(u, dtype=float)
    I = np.asarray(I, dtype=float)
    m, dim = u.shape
    _require_field(dim)
    if abs(I[0]) > 1e-12 * max(1.0, float(alg.norm(I))):
        raise DomainError("I must be purely imaginary")
    n = m + 1
    g = alg.identity_matrix(dim, n + 1)
    g[1:n, 0] = u
    g[n, 0] = alg.im(I) + alg.scalar(dim, 0.5 * float(alg.vnorm2(u)))
    g[n, 1:n] = alg.conj(u)
    return GroupElem(g, Basis.F)


def mk_n_point(x: NPoint) -> GroupElem:
    return mk_n(x.u, x.center)


def apply(g: GroupElem, v: ProjVec) -> ProjVec:
    """Matrix action followed by canonical right-normalization."""
    v = v.in_basis(g.basis)
    w = alg.matvec(g.matrix, v.coords)
    if not np.any(np.abs(w) > 0):
        raise DomainError("image is the zero vector")
    return ProjVec(w, g.basis).normalized()


def frame(field: Field, n: int, basis: Basis = Basis.E) -> list[ProjVec]:
    """The n + 2 frame points: basis lines plus the all-ones line."""
    pts = []
    for k in range(n + 1):
        c = np.zeros((n + 1, field.dim))
        c[k, 0] = 1.0
        pts.append(ProjVec(c, basis))
    c = np.zeros((n + 1, field.dim))
    c[:, 0] = 1.0
    pts.append(ProjVec(c, basis))
    return pts


def frame_error(g: GroupElem, h: GroupElem) -> float:
    """Largest chordal distance between images of the frame; 0 iff projectively equal."""
    h = h.in_basis(g.basis)
    return max(chordal_distance(apply(g, p), apply(h, p)) for p in frame(g.field, g.n, g.basis))


# --------------------------------------------------------------------------
# Heisenberg chart

def from_heisenberg(x: NPoint) -> ProjVec:
    if x.batch_shape:
        raise FieldMismatchError("chart maps one point at a time")
    _require_field(x.field.dim)
    last = x.center + alg.scalar(x.field.dim, 0.5 * float(alg.vnorm2(x.u)))
    coords = np.concatenate([alg.scalar(x.field.dim)[None, :], x.u, last[None, :]], axis=0)
    return ProjVec(coords, Basis.F)


def to_heisenberg(v: ProjVec, tol: float = BOUNDARY_TOL) -> NPoint:
    v = v.in_basis(Basis.F)
    if classify_point(v, tol) is not PointKind.BOUNDARY:
        raise PreconditionError("point is not on the boundary")
    scale = np.sqrt(float(alg.vnorm2(v.coords)))
    if float(alg.norm(v.coords[0])) <= tol * scale:
        raise PointAtInfinityError("the point at infinity has no Heisenberg coordinates")
    w = alg.mul(v.coords, alg.inv(v.coords[0])[None, :])
    return NPoint(w[1:-1], alg.im(w[-1]))


def sim_from_stab_infinity(g: GroupElem, tol: float = 1e-9) -> Similarity:
    """The similarity of N induced by an element of P = MAN (which fixes infinity)."""
    g = g.in_basis(Basis.F)
    field, n = g.field, g.n
    col = g.matrix[:, n, :]
    if np.sqrt(alg.vnorm2(col[:n])) > tol * np.sqrt(alg.vnorm2(col)):
        raise PreconditionError("not parabolic-stabilizing: g moves the point at infinity")
    c = to_heisenberg(apply(g, minus_one(field, n)))
    rest = (mk_n(-c.u, -c.center) @ g).matrix
    p, q, B = rest[0, 0], rest[n, n], rest[1:n, 1:n]
    abs_p = float(alg.norm(p))
    lam = float(np.sqrt(float(alg.norm(q)) / abs_p))
    alpha = p / abs_p
    P = B / (lam * abs_p)
    try:
        rot = Rotation.unitary(P, alpha, tol=1e-8)
    except DomainError as exc:
        raise NumericalDegeneracyError(f"rotation part is not unitary: {exc}") from None
    return Similarity(lam, rot, c)


# --------------------------------------------------------------------------
# Iwasawa decomposition

class Iwasawa(NamedTuple):
    k: GroupElem
    t: float
    u: np.ndarray
    I: np.ndarray

    @property
    def a(self) -> GroupElem:
        return mk_a(self.t, self.k.field, self.k.n)

    @property
    def n_part(self) -> GroupElem:
        return mk_n(self.u, self.I)

    def recompose(self) -> GroupElem:
        return (self.k @ self.a @ self.n_part).in_basis(Basis.E)

    def to_json(self) -> dict:
        return {
            "k": self.k.to_json(),
            "t": self.t,
            "u": [[float(x) for x in e] for e in self.u],
            "I": [float(x) for x in self.I],
        }


def iwasawa(g: GroupElem, tol: float = 1e-9) -> Iwasawa:
    """Factor ``g = k a_t n_{u,I}`` with ``k`` fixing the interior point "0".

    The AN part is read off from horospherical coordinates of ``g^{-1}("0")``:
    since ``(a n)^{-1}("0") = [1, -u, |u|^2/2 - I + e^{-2t}]`` in basis F, the
    normalized image ``[1, w, s]`` gives ``u = -w``, ``I = -Im s`` and
    ``e^{-2t} = Re s - |w|^2 / 2``.
    """
    if not is_isometry(g):
        raise DomainError("iwasawa needs an isometry of the hermitian form")
    field, n = g.field, g.n
    gF = g.in_basis(Basis.F)
    z = alg.matvec(gF.inverse().matrix, origin(field, n).in_basis(Basis.F).coords)
    if float(alg.norm(z[0])) <= 1e-14 * np.sqrt(float(alg.vnorm2(z))):
        raise NumericalDegeneracyError("image of the origin left the interior")
    z = alg.mul(z, alg.inv(z[0])[None, :])
    w, s = z[1:n], z[n]
    height = float(s[0]) - 0.5 * float(alg.vnorm2(w))
    if height <= 0:
        raise NumericalDegeneracyError("image of the origin is not an interior point")
    t = -0.5 * float(np.log(height))
    u = -w
    I = -alg.im(s)
    an = mk_a(t, field, n) @ mk_n(u, I)
    k = (gF @ an.inverse()).in_basis(Basis.E)

    scale = float(np.sqrt(np.sum(k.matrix ** 2)))
    off = np.sqrt(float(alg.vnorm2(k.matrix[:n, n])) + float(alg.vnorm2(k.matrix[n, :n])))
    if off > tol * scale or classify_point(apply(k, origin(field, n))) is not PointKind.INTERIOR:
        raise NumericalDegeneracyError(f"K factor does not fix the origin (off-block {off:.3g})")
    result = Iwasawa(k, t, u, I)
    err = frame_error(result.recompose(), g)
    if err > 1e-8:
        raise NumericalDegeneracyError(f"recomposition differs from input (frame error {err:.3g})")
    return result


def random_kan(rng: np.random.Generator, field: Field, n: int, t_scale: float = 1.0):
    """Random ``(k, t, u, I)`` and the product ``k a_t n_{u,I}`` (basis E)."""
    kp = alg.random_unitary(rng, field.dim, n)
    t = float(t_scale * rng.uniform(-1.0, 1.0))
    u = alg.random_elements(rng, field.dim, (n - 1,))
    I = alg.im(alg.random_elements(rng, field.dim)) if field is not Field.REAL else np.zeros(1)
    k = mk_k(kp)
    g = (k @ mk_a(t, field, n) @ mk_n(u, I)).in_basis(Basis.E)
    return (k, t, u, I), g
