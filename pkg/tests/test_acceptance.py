"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The terminal summary (see conftest.py) repeats the lines in criterion order.
"""
import hashlib
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from htgeom import algebra as alg
from htgeom import boundary as bd
from htgeom import dynamics as dy
from htgeom import heisenberg as hz
from htgeom import similarity as sm
from htgeom.algebra import Field
from htgeom.dynamics import INFINITY, ForbiddenSet, GeneratorSet
from htgeom.heisenberg import NPoint, Rotation
from htgeom.similarity import Similarity

SAMPLES = Path(__file__).resolve().parent.parent / "sample_inputs"
ALL_FIELDS = list(Field)
TOL = 1e-10


def report(num: int, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} criterion {num:2d}: {detail}")


def rank_for(field: Field) -> int:
    return 2 if field is Field.OCTONION else 3


def coord_gap(x: NPoint, y: NPoint) -> float:
    return float(np.max(np.abs(x.coords() - y.coords())))


def test_criterion_01_octonion_composition_norm():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    a, b = alg.random_elements(rng, 8, 10_000), alg.random_elements(rng, 8, 10_000)
    na, nb = alg.norm(a), alg.norm(b)
    excess = np.abs(alg.norm(alg.mul(a, b)) - na * nb) / (1.0 + na * nb)
    elapsed = time.perf_counter() - start
    ok = float(excess.max()) <= TOL and elapsed < 1.0
    report(1, ok, f"octonion |ab| = |a||b| on 1e4 pairs, max rel err {excess.max():.2e}, {elapsed:.3f}s")
    assert ok


def test_criterion_02_group_associativity_and_noncommutativity():
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    worst, witness = 0.0, {}
    for field in ALL_FIELDS:
        n = rank_for(field)
        x, y, z = (NPoint.random(rng, field, n, size=10_000) for _ in range(3))
        worst = max(worst, coord_gap(hz.compose(hz.compose(x, y), z), hz.compose(x, hz.compose(y, z))))
        if field is not Field.REAL:
            swap = np.abs(hz.compose(x, y).coords() - hz.compose(y, x).coords()).max(axis=-1)
            witness[field.symbol] = float(swap.max())
    elapsed = time.perf_counter() - start
    ok = worst <= TOL and all(v > 0.1 for v in witness.values()) and len(witness) == 3 and elapsed < 2.0
    report(2, ok, f"associativity max err {worst:.2e}; xy != yx gaps {witness}; {elapsed:.3f}s")
    assert ok


def test_criterion_03_norm_expansion_and_im_additivity():
    rng = np.random.default_rng(3)
    worst = 0.0
    for field in ALL_FIELDS:
        n = rank_for(field)
        u, v, w = (alg.random_elements(rng, field.dim, (10_000, n - 1)) for _ in range(3))
        lhs = alg.vnorm2(u + v)
        rhs = alg.vnorm2(u) + alg.vnorm2(v) + 2.0 * alg.re(alg.hermitian(u, v))
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        add = alg.im(alg.hermitian(u, v + w)) - alg.im(alg.hermitian(u, v)) - alg.im(alg.hermitian(u, w))
        worst = max(worst, float(np.max(np.abs(add))))
    ok = worst <= TOL
    report(3, ok, f"norm expansion and Im additivity on 1e4 samples per field, max err {worst:.2e}")
    assert ok


def test_criterion_04_metric_axioms():
    rng = np.random.default_rng(4)
    errs = {"symmetry": 0.0, "triangle": 0.0, "left_invariance": 0.0, "homogeneity": 0.0}
    for field in ALL_FIELDS:
        n = rank_for(field)
        x, y, z = (NPoint.random(rng, field, n, size=10_000) for _ in range(3))
        dxy = hz.distance(x, y)
        errs["symmetry"] = max(errs["symmetry"], float(np.max(np.abs(dxy - hz.distance(y, x)))))
        viol = hz.distance(x, z) - dxy - hz.distance(y, z)
        errs["triangle"] = max(errs["triangle"], float(np.max(viol)))
        shifted = hz.distance(hz.compose(z, x), hz.compose(z, y))
        errs["left_invariance"] = max(errs["left_invariance"], float(np.max(np.abs(shifted - dxy))))
        lam = rng.uniform(0.1, 10.0, 10_000)
        scaled = hz.distance(hz.dilate(lam, x), hz.dilate(lam, y))
        errs["homogeneity"] = max(errs["homogeneity"], float(np.max(np.abs(scaled - lam * dxy))))
    ok = all(v <= TOL for v in errs.values())
    report(4, ok, "metric axioms on 1e4 samples per field: "
           + ", ".join(f"{k} {v:.2e}" for k, v in errs.items()))
    assert ok


def test_criterion_05_geodesics_are_straight_lines():
    rng = np.random.default_rng(5)
    worst = 0.0
    for field in ALL_FIELDS:
        n = rank_for(field)
        p, v = NPoint.random(rng, field, n, size=1000), NPoint.random(rng, field, n, size=1000)
        t = rng.uniform(-2.0, 2.0, 1000)
        got = hz.geodesic(p, v, t)
        # p + t v + [p, t v] / 2 with [(u, I), (a, b)] = (0, 2 Im(u^* a))
        ta = t[:, None, None] * v.u
        expected_u = p.u + ta
        expected_c = p.center + t[:, None] * v.center + alg.im(alg.hermitian(p.u, ta))
        worst = max(worst, float(np.max(np.abs(got.u - expected_u))),
                    float(np.max(np.abs(got.center - expected_c))))
    ok = worst <= TOL
    report(5, ok, f"geodesic coordinates vs p + tv + [p, tv]/2 on 1e3 samples per field, max err {worst:.2e}")
    assert ok


def test_criterion_06_limit_set_taxonomy():
    C = Field.COMPLEX
    start = time.perf_counter()
    alpha = np.array([np.cos(2 * np.pi / 5), np.sin(2 * np.pi / 5)])
    rot = Similarity.rotation(Rotation.unitary(np.array([[[1.0, 0.0]]]), alpha))
    empty = dy.limit_set_estimate(GeneratorSet.of([rot]))
    t1 = Similarity.translation(NPoint(np.array([[1.0, 0.0]]), np.zeros(2)))
    t2 = Similarity.translation(NPoint(np.array([[0.0, 1.0]]), np.zeros(2)))
    single = dy.limit_set_estimate(GeneratorSet.of([t1, t2]))
    pair = dy.limit_set_estimate(GeneratorSet.of([sm.centered_dilation(NPoint.zero(C, 2), 0.5)]))
    elapsed = time.perf_counter() - start
    ok = (empty.classification == "Empty" and not empty.points
          and single.classification == "Single" and single.points == [INFINITY]
          and pair.classification == "Pair" and pair.points[1] is INFINITY
          and float(hz.gauge_norm(pair.points[0])) < pair.cluster_radius
          and elapsed < 5.0)
    report(6, ok, f"rotation -> {empty.classification}, translations -> {single.classification}(inf), "
           f"dilation -> {pair.classification}(0, inf); {elapsed:.2f}s")
    assert ok


def test_criterion_07_non_discreteness_witness():
    C = Field.COMPLEX
    start = time.perf_counter()
    f = sm.centered_dilation(NPoint.zero(C, 2), 0.5)
    g = Similarity.translation(NPoint(np.array([[1.0, 0.0]]), np.zeros(2)))
    w = sm.discreteness_witness(f, g, eps=1e-6, max_n=40)
    elapsed = time.perf_counter() - start
    ok = (w.status == "found" and w.distance < 1e-6 and w.gap_from_identity > 1e-6
          and max(w.pair) <= 40 and elapsed < 5.0)
    report(7, ok, f"witness {w.status} at pair {w.pair}, action distance {w.distance:.2e}, "
           f"distance from identity {w.gap_from_identity:.2e}; {elapsed:.2f}s")
    assert ok


def test_criterion_08_center_solve_round_trip():
    rng = np.random.default_rng(8)
    worst = 0.0
    for field in ALL_FIELDS:
        n = rank_for(field)
        beta = NPoint.random(rng, field, n, size=1000)
        beta = hz.dilate(1.0 / hz.gauge_norm(beta), beta)
        lam = rng.uniform(0.05, 0.95, 1000)
        x = NPoint.random(rng, field, n, size=1000)
        y = sm.paper_dilation(beta, lam, x)
        worst = max(worst, coord_gap(sm.center_solve(lam, x, y), beta))
    ok = worst <= 1e-8
    report(8, ok, f"center recovered from 1e3 (beta, lambda, x) per field, max coordinate err {worst:.2e}")
    assert ok


def test_criterion_09_halfspace_vs_sampling_oracle():
    rng = np.random.default_rng(9)
    start = time.perf_counter()
    rates = {}
    for field in (Field.COMPLEX, Field.QUATERNION, Field.OCTONION):
        for regime in ("beta1 != 0", "beta1 = 0"):
            b = NPoint.random(rng, field, 2)
            if regime == "beta1 = 0":
                b = NPoint(np.zeros_like(b.u), b.center)
            b = hz.dilate(1.0 / hz.gauge_norm(b), b)
            kind = sm.halfspace_classify(b)
            x = NPoint.random(rng, field, 2, size=1000, scale=2.0)
            keep = kind.boundary_distance(x) > 1e-3
            agree = kind.contains(x)[keep] == sm.visible_in_limit(b, x)[keep]
            rates[f"{field.symbol} {regime}"] = float(np.mean(agree))
    elapsed = time.perf_counter() - start
    ok = min(rates.values()) >= 0.99 and elapsed < 10.0
    report(9, ok, f"agreement with sampling oracle, worst {min(rates.values()):.4f} over "
           f"{len(rates)} (field, regime) cases; {elapsed:.2f}s")
    assert ok


def test_criterion_10_iwasawa_and_chart_equivariance():
    rng = np.random.default_rng(10)
    recompose = 0.0
    for field in (Field.REAL, Field.COMPLEX, Field.QUATERNION):
        for _ in range(100):
            _, g = bd.random_kan(rng, field, 3)
            recompose = max(recompose, bd.frame_error(bd.iwasawa(g).recompose(), g))
    equiv = 0.0
    for i in range(100):
        field = (Field.REAL, Field.COMPLEX, Field.QUATERNION)[i % 3]
        n = 3
        g = (bd.mk_m(alg.random_unitary(rng, field.dim, n - 1), alg.random_units(rng, field.dim))
             @ bd.mk_a(float(rng.uniform(-1.5, 1.5)), field, n)
             @ bd.mk_n_point(NPoint.random(rng, field, n)))
        s = bd.sim_from_stab_infinity(g)
        for _ in range(10):
            x = NPoint.random(rng, field, n)
            y = bd.to_heisenberg(bd.apply(g, bd.from_heisenberg(x)))
            equiv = max(equiv, coord_gap(y, s(x)))
    ok = recompose < 1e-8 and equiv < 1e-9
    report(10, ok, f"KAN recomposition frame error {recompose:.2e} over 300 products; "
           f"chart equivariance {equiv:.2e} on 1e3 samples")
    assert ok


def _stabilizing_examples(rng):
    """(ForbiddenSet, similarity preserving it setwise) pairs."""
    C = Field.COMPLEX
    out = []
    beta = NPoint.random(rng, C, 2)
    around = sm.compose(sm.compose(Similarity.translation(beta),
                                   Similarity(0.6, hz.random_rotation(rng, C, 2), NPoint.zero(C, 2))),
                        Similarity.translation(hz.inverse(beta)))
    out.append((ForbiddenSet.of_points(beta), around))
    a = NPoint(np.array([[0.8, -0.3]]), np.zeros(2))
    flip = Similarity.rotation(Rotation.unitary(np.array([[[-1.0, 0.0]]]), np.array([1.0, 0.0])))
    out.append((ForbiddenSet.of_points([a, flip(a)]), flip))
    H = Field.QUATERNION
    gamma = NPoint.random(rng, H, 2)
    spin = sm.compose(sm.compose(Similarity.translation(gamma),
                                 Similarity(1.8, hz.random_rotation(rng, H, 2), NPoint.zero(H, 2))),
                      Similarity.translation(hz.inverse(gamma)))
    out.append((ForbiddenSet.of_points(gamma), spin))
    plane = ForbiddenSet.vertical(np.array([[1.0, 0.0]]), 0.0, C)
    along = Similarity(0.7, Rotation.identity(C, 2), NPoint(np.array([[0.0, 0.4]]), np.array([0.0, 0.3])))
    out.append((plane, along))
    return out


def test_criterion_11_radius_function():
    rng = np.random.default_rng(11)
    lipschitz = 0.0
    for field in ALL_FIELDS:
        n = rank_for(field)
        for _ in range(40):
            I = ForbiddenSet.of_points(NPoint.random(rng, field, n, size=int(rng.integers(1, 6))))
            p, q = NPoint.random(rng, field, n, scale=2.0), NPoint.random(rng, field, n, scale=2.0)
            gap = dy.max_ball_radius(p, I) - dy.max_ball_radius(q, I) - float(hz.distance(p, q))
            lipschitz = max(lipschitz, gap)
    equiv, fried = 0.0, 0.0
    for I, f in _stabilizing_examples(rng):
        for _ in range(5):
            z, w = NPoint.random(rng, I.field, I.n), NPoint.random(rng, I.field, I.n)
            r = dy.max_ball_radius(z, I)
            equiv = max(equiv, abs(dy.max_ball_radius(f(z), I) - f.lam * r) / (1.0 + r))
            before = dy.fried_distance(z, w, I)
            fried = max(fried, abs(dy.fried_distance(f(z), f(w), I) - before) / max(before, 1e-300))
    ok = lipschitz <= 1e-12 and equiv <= 1e-9 and fried <= 1e-9
    report(11, ok, f"Lipschitz excess {lipschitz:.2e}, r(fz) - lam r(z) {equiv:.2e}, "
           f"Fried distance drift {fried:.2e}")
    assert ok


CLI_RUNS = [
    ["verify", "--samples", "2000"],
    ["orbit", str(SAMPLES / "two_dilations.json"), "--max-word-len", "6"],
    ["orbit", str(SAMPLES / "matrix_group.json"), "--max-word-len", "3", "--format", "json"],
    ["limitset", str(SAMPLES / "two_dilations.json"), "--max-word-len", "8"],
    ["iwasawa", str(SAMPLES / "identity_matrix.json")],
    ["fixedpoint", str(SAMPLES / "similarity.json")],
    ["discreteness", str(SAMPLES / "witness.json")],
    ["halfspace", str(SAMPLES / "halfspace.json")],
]


def test_criterion_12_cli_determinism(tmp_path):
    digests = {}
    same = True
    for i, args in enumerate(CLI_RUNS):
        outs = []
        for run in range(2):
            out = tmp_path / f"{i}_{run}.out"
            proc = subprocess.run([sys.executable, "-m", "htgeom.cli", *args, "--seed", "7", "--out", str(out)],
                                  capture_output=True, text=True)
            assert proc.returncode == 0, proc.stderr
            outs.append(out.read_bytes())
        same &= outs[0] == outs[1] and len(outs[0]) > 0
        digests[args[0]] = hashlib.sha256(outs[0]).hexdigest()[:12]
    commands = {a[0] for a in CLI_RUNS}
    ok = same and commands == {"verify", "orbit", "limitset", "iwasawa", "fixedpoint", "discreteness", "halfspace"}
    report(12, ok, f"byte-identical outputs across two runs of {len(CLI_RUNS)} invocations "
           f"covering {len(commands)} subcommands")
    assert ok
