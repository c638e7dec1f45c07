"""The similarity group Sim(N) and its dynamics.

A similarity acts by ``f(x) = c o dilate(l, rot(x))`` where ``o`` is the group
law with the translation on the left.  This is the only ordering for which
``distance(f x, f y) = l * distance(x, y)``, because the metric is
left-invariant.

Two expanded formulas with mixed translation conventions live next to the
clean maps:

* ``paper_dilation`` is ``x -> dilate(l, beta^{-1} o x) o beta`` (left
  subtraction, right addition); it fixes ``beta`` but is not a similarity of
  the left-invariant metric.
* ``center_solve_right`` inverts ``x -> dilate(l, x o beta^{-1}) o beta``
  (right subtraction, right addition).

``center_solve`` inverts ``paper_dilation``.  The two solvers agree whenever
``Im(x1^* beta1) = 0`` and otherwise differ in the center coordinate by
``2 l^2 / (1 - l^2) Im(x1^* beta1)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Union

import numpy as np

from . import algebra as alg
from . import heisenberg as hz
from .algebra import Field
from .errors import ConvergenceError, DomainError, FieldMismatchError, PreconditionError
from .heisenberg import NPoint, Rotation

PROBE_SEED = 20240917
N_PROBES = 8


@dataclass(frozen=True, eq=False)
class Similarity:
    lam: float
    rot: Rotation
    c: NPoint

    def __post_init__(self):
        lam = float(self.lam)
        if not lam > 0 or not np.isfinite(lam):
            raise DomainError("dilation factor must be positive")
        object.__setattr__(self, "lam", lam)
        if self.c.batch_shape:
            raise FieldMismatchError("translation part must be a single point")
        if self.c.field is not self.rot.field or self.c.u.shape[-2] != self.rot.m:
            raise FieldMismatchError("rotation and translation act on different groups")

    @property
    def field(self) -> Field:
        return self.c.field

    @property
    def rank(self) -> int:
        return self.c.rank

    # -- constructors -------------------------------------------------------
    @classmethod
    def identity(cls, field: Field, n: int) -> "Similarity":
        return cls(1.0, Rotation.identity(field, n), NPoint.zero(field, n))

    @classmethod
    def translation(cls, c: NPoint) -> "Similarity":
        return cls(1.0, Rotation.identity(c.field, c.rank), c)

    @classmethod
    def dilation(cls, lam: float, field: Field, n: int) -> "Similarity":
        return cls(lam, Rotation.identity(field, n), NPoint.zero(field, n))

    @classmethod
    def rotation(cls, rot: Rotation) -> "Similarity":
        n = rot.m + 1
        return cls(1.0, rot, NPoint.zero(rot.field, n))

    def __call__(self, x: NPoint) -> NPoint:
        return apply(self, x)

    def __matmul__(self, other: "Similarity") -> "Similarity":
        return compose(self, other)

    def to_json(self) -> dict:
        return {"lambda": self.lam, "rotation": self.rot.to_json(), "c": self.c.to_json()}

    @classmethod
    def from_json(cls, doc: dict, field: Field, n: int) -> "Similarity":
        c = NPoint.from_json(doc["c"], field, n) if "c" in doc else NPoint.zero(field, n)
        rot = Rotation.from_json(doc.get("rotation"), field, n)
        return cls(float(doc.get("lambda", 1.0)), rot, c)


def apply(f: Similarity, x: NPoint) -> NPoint:
    return hz.compose(f.c, hz.dilate(f.lam, hz.rotate(f.rot, x)))


def compose(f: Similarity, g: Similarity) -> Similarity:
    """``f o g``."""
    if (f.field, f.rank) != (g.field, g.rank):
        raise FieldMismatchError("similarities act on different groups")
    c = hz.compose(f.c, hz.dilate(f.lam, hz.rotate(f.rot, g.c)))
    return Similarity(f.lam * g.lam, f.rot.compose(g.rot), c)


def invert(f: Similarity) -> Similarity:
    rot_inv = f.rot.inverse()
    c = hz.rotate(rot_inv, hz.dilate(1.0 / f.lam, hz.inverse(f.c)))
    return Similarity(1.0 / f.lam, rot_inv, c)


def power(f: Similarity, k: int) -> Similarity:
    base = f if k >= 0 else invert(f)
    out = Similarity.identity(f.field, f.rank)
    for _ in range(abs(k)):
        out = compose(base, out)
    return out


def conjugate(g: Similarity, f: Similarity) -> Similarity:
    """``g o f o g^{-1}``."""
    return compose(compose(g, f), invert(g))


# --------------------------------------------------------------------------
# Map comparison by action on a fixed probe set

def probe_points(field: Field, n: int, seed: int = PROBE_SEED, count: int = N_PROBES) -> NPoint:
    rng = np.random.default_rng(seed)
    return NPoint.random(rng, field, n, size=count)


def point_gap(x: NPoint, y: NPoint) -> float:
    """Largest coordinate difference between two (batches of) points.

    Used to compare maps instead of the gauge distance, which turns roundoff
    of size eps in the center into a distance of size sqrt(eps).
    """
    return float(np.max(np.abs(x.coords() - y.coords())))


def action_distance(f: Similarity, g: Similarity, probes: NPoint | None = None) -> float:
    """Largest coordinate difference between ``f`` and ``g`` over the probe points."""
    if probes is None:
        probes = probe_points(f.field, f.rank)
    return point_gap(apply(f, probes), apply(g, probes))


def maps_close(f: Similarity, g: Similarity, tol: float = 1e-9, probes: NPoint | None = None) -> bool:
    return action_distance(f, g, probes) <= tol


# --------------------------------------------------------------------------
# Fixed points and centered dilations

def fixed_point(f: Similarity, tol: float = 1e-12, max_iter: int = 100_000) -> NPoint:
    """Fixed point of a similarity with ``lam != 1`` by contraction iteration.

    Stops once the gauge step drops below ``tol`` or the coordinates stop
    moving at working precision.  The gauge distance of two points that agree
    up to roundoff is of order sqrt(eps), so the second test is what ends the
    iteration for tight tolerances.
    """
    if abs(f.lam - 1.0) <= 1e-12:
        raise PreconditionError("no contracting fixed point: dilation factor is 1")
    step_map = f if f.lam < 1.0 else invert(f)
    p = NPoint.zero(f.field, f.rank)
    pc = p.coords()
    for _ in range(max_iter):
        q = apply(step_map, p)
        qc = q.coords()
        if hz.distance(p, q) < tol or np.abs(qc - pc).max() <= 4 * np.finfo(float).eps * (1.0 + np.abs(qc).max()):
            return q
        p, pc = q, qc
    raise ConvergenceError(f"fixed point iteration did not converge in {max_iter} steps")


def centered_dilation(beta: NPoint, lam: float) -> Similarity:
    """``x -> beta o dilate(lam, beta^{-1} o x)``; fixes ``beta``."""
    if lam <= 0:
        raise DomainError("dilation factor must be positive")
    c = hz.compose(beta, hz.dilate(lam, hz.inverse(beta)))
    return Similarity(lam, Rotation.identity(beta.field, beta.rank), c)


def paper_dilation(beta: NPoint, lam, x: NPoint) -> NPoint:
    """Expanded centered dilation with left subtraction and right addition.

    ``(l (x1 - b1) + b1, l^2 (x2 - b2) + b2 + l (1 + l) Im(x1^* b1))``
    """
    lam = np.asarray(lam, dtype=float)
    l1 = lam[..., None, None]
    l2 = (lam**2)[..., None]
    cross = alg.im(alg.hermitian(x.u, beta.u))
    u = l1 * (x.u - beta.u) + beta.u
    c = l2 * (x.center - beta.center) + beta.center + (lam * (1.0 + lam))[..., None] * cross
    return NPoint(u, c)


def right_conjugate_dilation(beta: NPoint, lam, x: NPoint) -> NPoint:
    """``x -> dilate(l, x o beta^{-1}) o beta``, the map ``center_solve_right`` inverts."""
    return hz.compose(hz.dilate(lam, hz.compose(x, hz.inverse(beta))), beta)


def _check_lam_not_one(lam) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    if np.any(np.abs(lam - 1.0) <= 1e-12):
        raise PreconditionError("dilation factor 1 is the translation case; no center exists")
    return lam


def center_solve(lam, x: NPoint, y: NPoint) -> NPoint:
    """The center ``beta`` with ``paper_dilation(beta, lam, x) = y``.

    ``c = (a_j - l a_i) / (1 - l)``,
    ``d = (b_j - l^2 b_i - l (1 + l) Im(a_i^* c)) / (1 - l^2)``.
    """
    lam = _check_lam_not_one(lam)
    c = (y.u - lam[..., None, None] * x.u) / (1.0 - lam)[..., None, None]
    cross = alg.im(alg.hermitian(x.u, c))
    d = (y.center - (lam**2)[..., None] * x.center - (lam * (1.0 + lam))[..., None] * cross) / (
        1.0 - lam**2
    )[..., None]
    return NPoint(c, d)


def center_solve_right(lam, x: NPoint, y: NPoint) -> NPoint:
    """The center ``beta`` with ``right_conjugate_dilation(beta, lam, x) = y``.

    ``c = (1 - l)^{-1} (a_j - l a_i)``,
    ``d = (1 - l^2)^{-1} (b_j - l^2 (b_i - Im(a_i^* c)) - l Im((a_i - c)^* c))``.
    """
    lam = _check_lam_not_one(lam)
    l1 = lam[..., None]
    c = (y.u - lam[..., None, None] * x.u) / (1.0 - lam)[..., None, None]
    term_i = x.center - alg.im(alg.hermitian(x.u, c))
    term_c = alg.im(alg.hermitian(x.u - c, c))
    d = (y.center - l1**2 * term_i - l1 * term_c) / (1.0 - l1**2)
    return NPoint(c, d)


# --------------------------------------------------------------------------
# Non-discreteness witness

@dataclass
class WitnessReport:
    status: str  # "found", "not_found" or "refused"
    reason: str = ""
    pair: tuple[int, int] | None = None
    distance: float | None = None
    gap_from_identity: float | None = None
    lam: float | None = None
    operated_on_inverse: bool = False
    rotation_parts: list = dc_field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.status == "found"

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "reason": self.reason,
            "pair": list(self.pair) if self.pair else None,
            "action_distance": self.distance,
            "gap_from_identity": self.gap_from_identity,
            "lambda": self.lam,
            "operated_on_inverse": self.operated_on_inverse,
            "rotation_parts": [r.to_json() for r in self.rotation_parts],
        }


def discreteness_witness(f: Similarity, g: Similarity, eps: float = 1e-6, max_n: int = 40) -> WitnessReport:
    """Search for two nearby distinct maps among ``h_n = f^n o (g f g^{-1}) o f^{-n}``.

    If ``f`` has dilation factor ``!= 1`` and ``g`` moves the fixed point of
    ``f``, the sequence ``h_n`` accumulates, so ``<f, g>`` is not discrete.
    """
    if (f.field, f.rank) != (g.field, g.rank):
        return WitnessReport("refused", "f and g act on different groups")
    if abs(f.lam - 1.0) <= 1e-12:
        return WitnessReport("refused", "dilation factor of f is 1")
    inverted = f.lam > 1.0
    if inverted:
        f = invert(f)
    try:
        a = fixed_point(f)
    except ConvergenceError as exc:
        return WitnessReport("refused", str(exc), operated_on_inverse=inverted)
    gap = float(hz.distance(apply(g, a), a))
    if gap <= 10 * eps:
        return WitnessReport("refused", f"g fixes the fixed point of f (gap {gap:.3g})", operated_on_inverse=inverted)

    probes = probe_points(f.field, f.rank)
    identity = Similarity.identity(f.field, f.rank)
    f_inv = invert(f)
    h = conjugate(g, f)
    seq = [h]
    rotations = [h.rot]
    for _ in range(max_n):
        seq.append(compose(compose(f, seq[-1]), f_inv))
        rotations.append(seq[-1].rot)
    images = [apply(hn, probes) for hn in seq]
    for m in range(1, len(seq)):
        for n in range(m):
            d = point_gap(images[n], images[m])
            if d < eps:
                gap_id = action_distance(seq[n], identity, probes)
                if gap_id > eps:
                    return WitnessReport(
                        "found", "", (n, m), d, gap_id, seq[n].lam, inverted, rotations[: m + 1]
                    )
    return WitnessReport("not_found", f"no pair within {eps} for n <= {max_n}",
                         lam=h.lam, operated_on_inverse=inverted, rotation_parts=rotations)


# --------------------------------------------------------------------------
# Half-space classification

@dataclass(frozen=True, eq=False)
class Vertical:
    """Half-space ``{x : <grad, x1> + offset < 0}`` depending only on ``u``.

    ``grad`` has the shape of ``u`` and pairs with it coefficient-wise.
    ``normalizer`` maps ``beta1`` to ``(c, 0, ..., 0)`` with ``c > 0``.
    """

    grad: np.ndarray
    offset: float
    normalizer: Rotation

    def functional(self, x: NPoint):
        return np.sum(x.u * self.grad, axis=(-2, -1)) + self.offset

    def contains(self, x: NPoint):
        return self.functional(x) < 0

    def boundary_distance(self, x: NPoint):
        """Euclidean distance (in linear coordinates) to the bounding hyperplane."""
        return np.abs(self.functional(x)) / np.sqrt(np.sum(self.grad**2))

    def to_json(self) -> dict:
        return {
            "kind": "vertical",
            "grad": [[float(v) for v in row] for row in self.grad],
            "offset": self.offset,
        }


@dataclass(frozen=True, eq=False)
class Horizontal:
    """Half-space ``{x : Re(x2^* xi) < 1}`` depending only on the center."""

    xi: np.ndarray

    def functional(self, x: NPoint):
        return alg.re(alg.mul(alg.conj(x.center), self.xi)) - 1.0

    def contains(self, x: NPoint):
        return self.functional(x) < 0

    def boundary_distance(self, x: NPoint):
        return np.abs(self.functional(x))

    def to_json(self) -> dict:
        return {"kind": "horizontal", "xi": [float(v) for v in self.xi]}


HalfspaceKind = Union[Vertical, Horizontal]


def normalizing_rotation(beta1: np.ndarray) -> Rotation:
    """Rotation of M sending the nonzero vector ``beta1`` to ``(|beta1|, 0, ..., 0)``."""
    beta1 = np.asarray(beta1, dtype=float)
    m, dim = beta1.shape
    nb = np.sqrt(alg.vnorm2(beta1))
    if dim == 8:
        return _octonion_normalizer(beta1[0] / nb)
    eye = alg.identity_matrix(dim, m)
    k = int(np.argmax(alg.norm(beta1)))
    cols = np.zeros((m, m, dim))
    cols[:, 0, :] = beta1 / nb
    for col, j in enumerate(j for j in range(m) if j != k):
        cols[:, col + 1, :] = eye[:, j, :]
    U = alg.gram_schmidt(cols)
    return Rotation.unitary(alg.conj_transpose(U))


def _octonion_normalizer(b: np.ndarray) -> Rotation:
    """Two ``m_mu`` steps sending the unit octonion ``b`` to 1.

    With ``b = cos t + sin t v`` and ``w`` a unit imaginary orthogonal to
    ``v``, everything lives in the quaternion subalgebra spanned by
    ``1, v, w, vw``; there ``x -> (x mu1^{-1}) mu2^{-1}`` is right
    multiplication by ``mu1 mu2``.
    """
    imag = alg.im(b)
    s = float(alg.norm(imag))
    v = imag / s if s > 1e-15 else alg.basis(8, 1)
    t = float(np.arctan2(s, b[0]))
    if abs(t) < 1e-15:
        return Rotation.octonionic([])
    k = 1 + int(np.argmin(np.abs(v[1:])))
    w = alg.basis(8, k)
    w = w - np.dot(w, v) * v
    w = w / alg.norm(w)
    vw = alg.mul(v, w)
    mu2 = -np.cos(t) * w - np.sin(t) * vw
    return Rotation.octonionic([w, mu2 / alg.norm(mu2)])


def halfspace_classify(beta: NPoint, tol: float = 1e-9) -> HalfspaceKind:
    """Small-dilation visibility half-space for a center on the unit gauge sphere."""
    if beta.batch_shape:
        raise FieldMismatchError("classify one center at a time")
    nb = hz.gauge_norm(beta)
    if abs(nb - 1.0) > tol:
        raise PreconditionError(f"center must lie on the unit gauge sphere (norm {nb:.12g})")
    b1, b2 = beta.u, beta.center
    if np.sqrt(alg.vnorm2(b1)) <= tol:
        return Horizontal(b2 / alg.norm(b2))
    # first-order expansion of |paper_dilation(beta, l, x)|^4 - 1 in l:
    #   4 |b1|^2 (Re(x1^* b1) - |b1|^2) + 2 <b2, Im(x1^* b1)>,
    # linear in x1; read its coefficients off the real basis of x1.
    m, dim = b1.shape
    s1 = alg.vnorm2(b1)
    basis = np.eye(m * dim).reshape(m * dim, m, dim)

    def linear_part(x1):
        h = alg.hermitian(x1, b1)
        return 4.0 * s1 * alg.re(h) + 2.0 * np.sum(b2 * alg.im(h), axis=-1)

    grad = linear_part(basis).reshape(m, dim)
    offset = float(-4.0 * s1 * s1)
    return Vertical(grad, offset, normalizing_rotation(b1))


def _stable_quartic_increment(beta: NPoint, g: NPoint):
    """``|g|^4 - |beta|^4`` evaluated through small differences."""
    du = g.u - beta.u
    dc = g.center - beta.center
    s_beta = alg.vnorm2(beta.u)
    ds = 2.0 * np.sum(beta.u * du, axis=(-2, -1)) + alg.vnorm2(du)
    dquart = ds * (2.0 * s_beta + ds)
    dcenter = 2.0 * np.sum(beta.center * dc, axis=-1) + alg.norm2(dc)
    return dquart + dcenter


def visible_in_limit(beta: NPoint, x: NPoint, lambda_min: float = 1e-5, samples: int = 6,
                     span: float = 10.0):
    """Brute-force oracle: is ``paper_dilation(beta, l, x)`` inside the unit ball for some small l?

    The grid is geometric from ``lambda_min`` down to ``lambda_min / span``.
    """
    grid = np.geomspace(lambda_min, lambda_min / span, samples)
    base = float(hz.gauge_norm(beta)) ** 4 - 1.0
    result = np.zeros(x.batch_shape, dtype=bool)
    for lam in grid:
        g = paper_dilation(beta, lam, x)
        result |= (base + _stable_quartic_increment(beta, g)) < 0.0
    return bool(result) if result.ndim == 0 else result
