"""Orbits, limit sets and the radius function of groups of similarities.

Words are enumerated breadth first.  A word of length ``L + 1`` is a letter
composed on the left of a word of length ``L``; inverse letters are included
by default and freely cancelling pairs are skipped.  All iteration orders are
fixed, so identical inputs give identical outputs.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from typing import Sequence, Union

import numpy as np
from scipy import linalg as sla
from scipy import optimize
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import algebra as alg
from . import boundary as bd
from . import heisenberg as hz
from . import similarity as sm
from .algebra import Field
from .errors import DomainError, FieldMismatchError, PreconditionError
from .heisenberg import NPoint
from .similarity import Horizontal, Similarity, Vertical


class _Infinity:
    """The point at infinity of N, kept symbolic."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITY"

    def to_json(self) -> str:
        return "infinity"


INFINITY = _Infinity()
LimitPoint = Union[NPoint, _Infinity]


def _inverse_name(name: str) -> str:
    if len(name) == 1 and name.isalpha():
        return name.swapcase()
    return name[:-3] if name.endswith("^-1") else name + "^-1"


def _default_names(k: int) -> list[str]:
    letters = "abcdefghijklmnopqrstuvwxyz"
    return [letters[i] if i < 26 else f"g{i}" for i in range(k)]


# --------------------------------------------------------------------------
# Generator sets

@dataclass(frozen=True, eq=False)
class GeneratorSet:
    mode: str  # "sim" or "matrix"
    field: Field
    n: int
    generators: tuple
    names: tuple = ()

    def __post_init__(self):
        if self.mode not in ("sim", "matrix"):
            raise FieldMismatchError(f"unknown generator mode {self.mode!r}")
        gens = tuple(self.generators)
        if not gens:
            raise PreconditionError("a generator set must be nonempty")
        kind = Similarity if self.mode == "sim" else bd.GroupElem
        for g in gens:
            if not isinstance(g, kind):
                raise FieldMismatchError(f"{self.mode} mode expects {kind.__name__} generators")
            rank = g.rank if self.mode == "sim" else g.n
            if g.field is not self.field or rank != self.n:
                raise FieldMismatchError("generators act on different spaces")
        names = tuple(self.names) or tuple(_default_names(len(gens)))
        if len(names) != len(gens) or len(set(names)) != len(names):
            raise FieldMismatchError("need one distinct name per generator")
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "names", names)

    @classmethod
    def of(cls, generators: Sequence, names: Sequence[str] = ()) -> "GeneratorSet":
        gens = list(generators)
        if not gens:
            raise PreconditionError("a generator set must be nonempty")
        mode = "sim" if isinstance(gens[0], Similarity) else "matrix"
        n = gens[0].rank if mode == "sim" else gens[0].n
        return cls(mode, gens[0].field, n, tuple(gens), tuple(names))

    def letters(self, include_inverses: bool = True) -> list[tuple[str, object]]:
        """Generators (and inverses) as ``(name, map)``; letter ``2i + 1`` inverts ``2i``."""
        out = []
        for name, g in zip(self.names, self.generators):
            out.append((name, g))
            if include_inverses:
                inv = sm.invert(g) if self.mode == "sim" else g.inverse()
                out.append((_inverse_name(name), inv))
        return out

    def to_json(self) -> dict:
        gens = []
        for name, g in zip(self.names, self.generators):
            doc = g.to_json()
            doc["name"] = name
            gens.append(doc)
        return {"field": self.field.symbol, "n": self.n, "mode": self.mode, "generators": gens}

    @classmethod
    def from_json(cls, doc: dict) -> "GeneratorSet":
        field = Field.parse(doc["field"])
        n = int(doc["n"])
        mode = doc.get("mode", "sim")
        if field is Field.OCTONION and n != 2:
            raise FieldMismatchError("octonionic groups have n = 2")
        gens, names = [], []
        for i, g in enumerate(doc["generators"]):
            names.append(str(g.get("name", _default_names(i + 1)[i])))
            if mode == "sim":
                gens.append(Similarity.from_json(g, field, n))
            else:
                elem = bd.GroupElem.from_json({"field": field.symbol, "n": n, **g})
                gens.append(elem)
        return cls(mode, field, n, tuple(gens), tuple(names))


def _is_inverse_pair(i: int, j: int, with_inverses: bool) -> bool:
    return with_inverses and i >= 0 and j >= 0 and (i ^ 1) == j


def _grid_keys(coords: np.ndarray, cell: float) -> list[bytes]:
    q = np.rint(coords / cell).astype(np.int64) + 0
    return [row.tobytes() for row in q]


# --------------------------------------------------------------------------
# Orbits

@dataclass
class OrbitCloud:
    mode: str
    field: Field
    n: int
    coords: np.ndarray
    words: list[str]
    lengths: np.ndarray
    truncated: bool
    lambdas: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.words)

    def points(self):
        if self.mode == "sim":
            return NPoint.from_coords(self.coords, self.field, self.n)
        d = self.field.dim
        return [bd.ProjVec(c.reshape(self.n + 1, d), bd.Basis.E) for c in self.coords]

    def header(self) -> list[str]:
        return [f"x{i}" for i in range(self.coords.shape[1])] + ["word_length", "word"]

    def rows(self):
        for c, length, word in zip(self.coords, self.lengths, self.words):
            yield [format(float(v) + 0.0, ".17g") for v in c] + [str(int(length)), word]

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "field": self.field.symbol,
            "n": self.n,
            "truncated": self.truncated,
            "points": [
                {"coords": [float(v) for v in c], "word_length": int(length), "word": word}
                for c, length, word in zip(self.coords, self.lengths, self.words)
            ],
        }


def _images(letters, frontier, mode: str, jobs: int):
    """Images of the frontier under every letter; parallel over letters."""
    def one(idx):
        _, g = letters[idx]
        if mode == "sim":
            return sm.apply(g, frontier)
        return [bd.apply(g, v).in_basis(bd.Basis.E).normalized() for v in frontier]

    idxs = range(len(letters))
    if jobs > 1 and len(letters) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, idxs))
    return [one(i) for i in idxs]


def _flat(mode: str, pts) -> np.ndarray:
    if mode == "sim":
        return pts.coords().reshape(-1, pts.coords().shape[-1])
    return np.array([v.in_basis(bd.Basis.E).normalized().coords.ravel() for v in pts])


def orbit(gens: GeneratorSet, base=None, max_word_len: int = 3, dedup_tol: float = 1e-9,
          cap: int = 100_000, include_inverses: bool = True, jobs: int = 1) -> OrbitCloud:
    """Breadth-first orbit of ``base`` under words of length <= ``max_word_len``.

    Points closer than ``dedup_tol`` in coordinates (a grid of that cell size)
    are merged, keeping the first word found.  Once ``cap`` points have been
    collected the cloud is returned with ``truncated=True``.  In matrix mode
    the base defaults to the interior point "0" and points are stored as
    normalized E-basis coordinates.
    """
    if max_word_len < 1:
        raise PreconditionError("max_word_len must be at least 1")
    if dedup_tol <= 0:
        raise PreconditionError("dedup_tol must be positive")
    mode = gens.mode
    if base is None:
        base = NPoint.zero(gens.field, gens.n) if mode == "sim" else bd.origin(gens.field, gens.n)
    if mode == "sim":
        frontier = NPoint(base.u[None], base.center[None])
    else:
        frontier = [base.in_basis(bd.Basis.E).normalized()]
    letters = gens.letters(include_inverses)

    coords = [_flat(mode, frontier)]
    words, lengths, first = [""], [0], [-1]
    seen = set(_grid_keys(coords[0], dedup_tol))
    truncated = False
    front_idx = [0]
    for depth in range(1, max_word_len + 1):
        if not front_idx or truncated:
            break
        images = _images(letters, frontier, mode, jobs)
        new_pts, new_idx = [], []
        for li, img in enumerate(images):
            flat = _flat(mode, img)
            keys = _grid_keys(flat, dedup_tol)
            for j, parent in enumerate(front_idx):
                if _is_inverse_pair(li, first[parent], include_inverses):
                    continue
                if keys[j] in seen:
                    continue
                if len(words) >= cap:
                    truncated = True
                    break
                seen.add(keys[j])
                words.append(letters[li][0] + words[parent])
                lengths.append(depth)
                first.append(li)
                coords.append(flat[j:j + 1])
                new_idx.append(len(words) - 1)
                new_pts.append(img[j] if mode == "sim" else img[j])
            if truncated:
                break
        front_idx = new_idx
        if not new_pts:
            break
        frontier = NPoint.stack(new_pts) if mode == "sim" else new_pts
    return OrbitCloud(mode, gens.field, gens.n, np.concatenate(coords, axis=0), words,
                      np.array(lengths, dtype=int), truncated)


# --------------------------------------------------------------------------
# Word states (point of 0, dilation product) for N-mode analysis

@dataclass
class _States:
    points: NPoint
    log_lam: np.ndarray
    words: list[str]
    lengths: np.ndarray
    truncated: bool


def _word_states(gens: GeneratorSet, base: NPoint, max_word_len: int, include_inverses: bool,
                 cap: int, dedup_tol: float = 1e-9) -> _States:
    """All reduced words up to the given length, as ``(w(base), log lambda_w)``.

    Two words are merged when both the image of ``base`` and the dilation
    factor agree, which collapses relations such as commuting translations.
    """
    letters = gens.letters(include_inverses)
    log_l = np.array([np.log(g.lam) for _, g in letters])
    pts = [NPoint(base.u[None], base.center[None])]
    logs = [np.zeros(1)]
    words, lengths, first = [""], [0], [-1]

    def keyed(p: NPoint, ll: np.ndarray):
        return _grid_keys(np.concatenate([p.coords(), ll[:, None]], axis=1), dedup_tol)

    seen = set(keyed(pts[0], logs[0]))
    frontier, front_log, front_idx = pts[0], logs[0], [0]
    truncated = False
    for depth in range(1, max_word_len + 1):
        new_u, new_c, new_l, new_idx = [], [], [], []
        for li, (name, g) in enumerate(letters):
            img = sm.apply(g, frontier)
            ll = front_log + log_l[li]
            keys = keyed(img, ll)
            for j, parent in enumerate(front_idx):
                if _is_inverse_pair(li, first[parent], include_inverses) or keys[j] in seen:
                    continue
                if len(words) >= cap:
                    truncated = True
                    break
                seen.add(keys[j])
                words.append(name + words[parent])
                lengths.append(depth)
                first.append(li)
                new_u.append(img.u[j])
                new_c.append(img.center[j])
                new_l.append(ll[j])
                new_idx.append(len(words) - 1)
            if truncated:
                break
        if not new_idx:
            break
        frontier = NPoint(np.stack(new_u), np.stack(new_c))
        front_log = np.array(new_l)
        front_idx = new_idx
        pts.append(frontier)
        logs.append(front_log)
        if truncated:
            break
    all_pts = NPoint(np.concatenate([p.u for p in pts]), np.concatenate([p.center for p in pts]))
    return _States(all_pts, np.concatenate(logs), words, np.array(lengths, dtype=int), truncated)


# --------------------------------------------------------------------------
# Limit sets

@dataclass(frozen=True)
class EvidencePoint:
    point: NPoint
    word: str
    word_length: int
    lam: float

    def to_json(self) -> dict:
        return {"point": self.point.to_json(), "word": self.word,
                "word_length": self.word_length, "lambda": self.lam}


@dataclass
class LimitSetReport:
    classification: str  # "Empty", "Single", "Pair" or "Larger"
    points: list = dc_field(default_factory=list)
    evidence: list = dc_field(default_factory=list)
    contains_infinity: bool = False
    max_lambda: float = 1.0
    min_lambda: float = 1.0
    low_confidence: bool = False
    assumes_discrete: bool = True
    clusters: int = 0
    cluster_radius: float = 1e-3
    max_word_len: int = 0
    words_explored: int = 0
    truncated: bool = False
    note: str = ""

    def to_json(self) -> dict:
        return {
            "classification": self.classification,
            "points": [p.to_json() for p in self.points],
            "contains_infinity": self.contains_infinity,
            "max_lambda": self.max_lambda,
            "min_lambda": self.min_lambda,
            "low_confidence": self.low_confidence,
            "assumes_discrete": self.assumes_discrete,
            "clusters": self.clusters,
            "cluster_radius": self.cluster_radius,
            "max_word_len": self.max_word_len,
            "words_explored": self.words_explored,
            "truncated": self.truncated,
            "note": self.note,
            "evidence": [e.to_json() for e in self.evidence],
        }


def _pairwise_gauge(points: NPoint, chunk: int = 256) -> np.ndarray:
    k = len(points)
    out = np.empty((k, k))
    for s in range(0, k, chunk):
        block = points[s:s + chunk]
        bu = block.u[:, None]
        bc = block.center[:, None]
        out[s:s + chunk] = hz.distance(NPoint(np.broadcast_to(bu, (len(block), k) + bu.shape[2:]),
                                              np.broadcast_to(bc, (len(block), k) + bc.shape[2:])),
                                       NPoint(np.broadcast_to(points.u[None], (len(block),) + points.u.shape),
                                              np.broadcast_to(points.center[None], (len(block),) + points.center.shape)))
    return out


def _thin(points: NPoint, order: np.ndarray, cell: float, limit: int) -> np.ndarray:
    """Indices (in ``order``) keeping one point per grid cell, at most ``limit``."""
    keys = _grid_keys(points.coords()[order], cell)
    keep, seen = [], set()
    for i, k in zip(order, keys):
        if k not in seen:
            seen.add(k)
            keep.append(i)
    keep = np.array(keep, dtype=int)
    if len(keep) > limit:
        keep = keep[np.linspace(0, len(keep) - 1, limit).round().astype(int)]
    return keep


def limit_set_estimate(gens: GeneratorSet, max_word_len: int = 10, cluster_radius: float = 1e-3,
                       contraction: float = 1e-2, include_inverses: bool = True,
                       cap: int = 200_000, max_evidence: int = 3000) -> LimitSetReport:
    """Estimate the limit set of the group generated by similarities of N.

    Words whose dilation product is below ``contraction`` send 0 close to an
    attracting point of the limit set; those images are clustered by single
    linkage at ``cluster_radius`` widened by each image's distance bound to
    its word's attracting point.  Infinity is flagged when some word expands
    or when the orbit of 0 keeps growing with the word length.
    """
    if gens.mode != "sim":
        raise PreconditionError("limit set estimation works on similarities of N")
    if max_word_len < 1 or cluster_radius <= 0 or not 0 < contraction < 1:
        raise PreconditionError("need max_word_len >= 1, cluster_radius > 0, 0 < contraction < 1")
    base = NPoint.zero(gens.field, gens.n)
    st = _word_states(gens, base, max_word_len, include_inverses, cap)
    lam = np.exp(st.log_lam)
    lam_max, lam_min = float(lam.max()), float(lam.min())
    gauge = np.asarray(hz.gauge_norm(st.points))
    reach = [float(gauge[st.lengths <= d].max()) for d in range(max_word_len + 1)]
    deepest = int(st.lengths.max())
    growing = deepest >= 2 and reach[deepest] > 1.5 * reach[deepest // 2] + cluster_radius
    contains_inf = bool(lam_max > 1.0 + 1e-9 or growing)
    report = LimitSetReport(
        "Empty", contains_infinity=contains_inf, max_lambda=lam_max, min_lambda=lam_min,
        cluster_radius=cluster_radius, max_word_len=max_word_len,
        words_explored=len(st.words), truncated=st.truncated,
    )

    cand = np.flatnonzero(lam < contraction)
    if cand.size == 0:
        if abs(lam_min - 1.0) > 1e-9 or abs(lam_max - 1.0) > 1e-9:
            report.classification = "Larger"
            report.low_confidence = True
            report.note = "dilating words present but none contracted below the threshold"
        elif contains_inf:
            report.classification = "Single"
            report.points = [INFINITY]
        return report

    order = cand[np.argsort(lam[cand], kind="stable")]
    keep = _thin(st.points, order, cluster_radius / 4, max_evidence)
    pts = st.points[keep]
    dist = _pairwise_gauge(pts)
    # w(0) is within lam |w(0)| / (1 - lam) of the attracting point of w
    slack = lam[keep] * gauge[keep] / (1.0 - lam[keep])
    reach_ij = cluster_radius + slack[:, None] + slack[None, :]
    adj = csr_matrix(dist <= reach_ij)
    n_clusters, labels = connected_components(adj, directed=False)
    report.clusters = int(n_clusters)
    report.evidence = [
        EvidencePoint(st.points[i], st.words[i], int(st.lengths[i]), float(lam[i])) for i in keep
    ]
    diam = max(float(dist[np.ix_(labels == c, labels == c)].max()) for c in range(n_clusters))
    if n_clusters == 1 and diam <= 10 * cluster_radius + 2 * float(slack.max()):
        a = st.points[int(keep[0])]
        report.classification = "Pair" if contains_inf else "Single"
        report.points = [a, INFINITY] if contains_inf else [a]
        return report
    report.classification = "Larger"
    if n_clusters > 1:
        apart = labels[:, None] != labels[None, :]
        between = (dist - reach_ij + cluster_radius)[apart]
        if between.size and float(between.min()) < 10 * cluster_radius:
            report.low_confidence = True
            report.note = "clusters closer than ten cluster radii"
    if report.truncated:
        report.low_confidence = True
        report.note = (report.note + "; " if report.note else "") + "word enumeration truncated"
    return report


def source_sink(f: Similarity) -> tuple[LimitPoint, LimitPoint]:
    """(attracting, repelling) fixed points of a similarity with ``lam != 1``."""
    if abs(f.lam - 1.0) <= 1e-12:
        raise PreconditionError("no dual pair: dilation factor is 1")
    p = sm.fixed_point(f)
    return (p, INFINITY) if f.lam < 1.0 else (INFINITY, p)


def autosimilarity_check(gens: GeneratorSet, report: LimitSetReport, radius: float,
                         max_word_len: int | None = None, include_inverses: bool = True) -> bool:
    """Sampling check that the orbit of a neighbourhood of one evidence point covers the estimate.

    True iff every evidence point lies within ``radius`` of ``w(p)`` for some
    word ``w`` of bounded length, where ``p`` is the first evidence point.
    """
    if report.classification != "Larger":
        raise PreconditionError("autosimilarity is checked on non-elementary (Larger) limit sets")
    if gens.mode != "sim":
        raise PreconditionError("autosimilarity works on similarities of N")
    ident = Similarity.identity(gens.field, gens.n)
    if all(sm.maps_close(g, ident) for g in gens.generators):
        raise PreconditionError("degenerate generators: every generator is the identity")
    if not report.evidence:
        raise PreconditionError("report carries no evidence points")
    length = max_word_len if max_word_len is not None else report.max_word_len
    p = report.evidence[0].point
    st = _word_states(gens, p, length, include_inverses, cap=200_000)
    for e in report.evidence:
        q = e.point
        qs = NPoint(np.broadcast_to(q.u, st.points.u.shape), np.broadcast_to(q.center, st.points.center.shape))
        if not np.any(hz.distance(qs, st.points) < radius):
            return False
    return True


# --------------------------------------------------------------------------
# Forbidden sets and the radius function

@dataclass(frozen=True, eq=False)
class ForbiddenSet:
    """Either finitely many points, or an affine set ``{x : <a, coords(x)> = b}``."""

    field: Field
    n: int
    points: NPoint | None = None
    normal: np.ndarray | None = None
    level: float = 0.0
    kind: str = "points"  # "points", "vertical" or "horizontal"

    def __post_init__(self):
        if self.kind == "points":
            if self.points is None or len(self.points) == 0:
                raise PreconditionError("a forbidden set must be nonempty")
        else:
            a = np.asarray(self.normal, dtype=float)
            if not np.any(a):
                raise PreconditionError("affine forbidden set needs a nonzero normal")

    @classmethod
    def of_points(cls, points) -> "ForbiddenSet":
        if isinstance(points, NPoint):
            pts = points if points.batch_shape else NPoint(points.u[None], points.center[None])
        else:
            pts = NPoint.stack(list(points))
        return cls(pts.field, pts.rank, points=pts)

    @classmethod
    def vertical(cls, grad, offset: float, field: Field) -> "ForbiddenSet":
        """``{x : <grad, u> + offset = 0}``."""
        grad = np.asarray(grad, dtype=float)
        m = grad.shape[0]
        normal = np.concatenate([grad.ravel(), np.zeros(field.dim - 1)])
        return cls(field, m + 1, normal=normal, level=-float(offset), kind="vertical")

    @classmethod
    def horizontal(cls, xi, n: int, level: float = 1.0) -> "ForbiddenSet":
        """``{x : Re(I^* xi) = level}``."""
        xi = np.asarray(xi, dtype=float)
        field = Field.from_dim(xi.shape[-1])
        normal = np.concatenate([np.zeros((n - 1) * field.dim), xi[1:]])
        return cls(field, n, normal=normal, level=float(level), kind="horizontal")

    @classmethod
    def from_halfspace(cls, hs: Union[Vertical, Horizontal], n: int = 2) -> "ForbiddenSet":
        if isinstance(hs, Vertical):
            return cls.vertical(hs.grad, hs.offset, Field.from_dim(hs.grad.shape[-1]))
        return cls.horizontal(hs.xi, n)

    def to_json(self) -> dict:
        if self.kind == "points":
            return {"kind": "points", "points": [self.points[i].to_json() for i in range(len(self.points))]}
        return {"kind": self.kind, "normal": [float(v) for v in self.normal], "level": self.level}


def _affine_min_distance(z: NPoint, I: ForbiddenSet, starts: int = 6) -> float:
    a = np.asarray(I.normal, dtype=float)
    y0 = a * (I.level / float(a @ a))
    N = sla.null_space(a[None, :])
    zc = z.coords()
    field, n = I.field, I.n
    z_inv = hz.inverse(z)

    def sq(s):
        y = NPoint.from_coords(y0 + N @ s, field, n)
        return float(hz.gauge_norm(hz.compose(z_inv, y))) ** 2

    s0 = N.T @ (zc - y0)
    scale = abs(float(a @ zc) - I.level) / np.sqrt(float(a @ a)) + 1.0
    rng = np.random.default_rng(0)
    best = np.inf
    inits = [s0] + [s0 + scale * rng.standard_normal(N.shape[1]) for _ in range(starts - 1)]
    for s in inits:
        res = optimize.minimize(sq, s, method="BFGS", options={"gtol": 1e-12, "maxiter": 2000})
        res = optimize.minimize(sq, res.x, method="Nelder-Mead",
                                options={"xatol": 1e-12, "fatol": 1e-16, "maxiter": 4000})
        best = min(best, float(res.fun))
    return float(np.sqrt(best))


def max_ball_radius(z: NPoint, I: ForbiddenSet) -> float:
    """Largest radius of a gauge ball around ``z`` missing ``I``: ``inf_{y in I} d(z, y)``."""
    if z.batch_shape:
        raise FieldMismatchError("max_ball_radius takes one point")
    if (z.field, z.rank) != (I.field, I.n):
        raise FieldMismatchError("point and forbidden set live on different groups")
    if I.kind == "points":
        pts = I.points
        zs = NPoint(np.broadcast_to(z.u, pts.u.shape), np.broadcast_to(z.center, pts.center.shape))
        r = float(np.min(hz.distance(zs, pts)))
    else:
        r = _affine_min_distance(z, I)
    if r <= 1e-12:
        raise DomainError("point lies in the forbidden set")
    return r


def fried_distance(p: NPoint, q: NPoint, I: ForbiddenSet) -> float:
    """``d(p, q) / (r(p) + r(q))``; unchanged by similarities that preserve ``I``."""
    rp = max_ball_radius(p, I)
    rq = max_ball_radius(q, I)
    return float(hz.distance(p, q)) / (rp + rq)
