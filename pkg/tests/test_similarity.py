import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from htgeom import algebra as alg
from htgeom import heisenberg as hz
from htgeom import similarity as sm
from htgeom.algebra import Field
from htgeom.errors import ConvergenceError, DomainError, PreconditionError
from htgeom.heisenberg import NPoint, Rotation
from htgeom.similarity import Horizontal, Similarity, Vertical

from oracles import CENTER_SOLVE_EXAMPLE, FIXED_POINT_ROTATED, FIXED_POINT_SIMPLE

C = Field.COMPLEX
FIELDS = list(Field)
seeds = st.integers(0, 2**32 - 1)


def rank_for(field):
    return 2 if field is Field.OCTONION else 3


def random_sim(rng, field, n, lam=None):
    lam = float(rng.uniform(0.2, 3.0)) if lam is None else lam
    return Similarity(lam, hz.random_rotation(rng, field, n), NPoint.random(rng, field, n))


def unit_sphere_point(rng, field, n):
    x = NPoint.random(rng, field, n)
    return hz.dilate(1.0 / hz.gauge_norm(x), x)


def test_apply_examples(rng):
    x = NPoint.random(rng, C, 2)
    assert sm.apply(Similarity.identity(C, 2), x).isclose(x)
    c = NPoint.random(rng, C, 2)
    assert sm.apply(Similarity.translation(c), NPoint.zero(C, 2)).isclose(c)


def test_translations_compose_by_the_group_law(rng):
    a, b = NPoint.random(rng, C, 2), NPoint.random(rng, C, 2)
    t = sm.compose(Similarity.translation(a), Similarity.translation(b))
    assert t.c.isclose(hz.compose(a, b)) and t.lam == 1.0


def test_invert_examples(rng):
    ident = Similarity.identity(C, 2)
    assert sm.maps_close(sm.invert(ident), ident)
    assert sm.invert(Similarity.dilation(4.0, C, 2)).lam == pytest.approx(0.25)
    f = random_sim(rng, Field.QUATERNION, 3)
    assert sm.maps_close(sm.invert(sm.invert(f)), f)
    assert sm.maps_close(sm.compose(f, sm.invert(f)), Similarity.identity(Field.QUATERNION, 3), 1e-10)


def test_power(rng):
    f = random_sim(rng, C, 2)
    assert sm.maps_close(sm.power(f, 3), f @ f @ f, 1e-10)
    assert sm.maps_close(sm.power(f, -2), sm.invert(f @ f), 1e-10)


@given(st.sampled_from(FIELDS), seeds)
def test_similarity_algebra(field, seed):
    rng = np.random.default_rng(seed)
    n = rank_for(field)
    f, g = random_sim(rng, field, n), random_sim(rng, field, n)
    x, y = NPoint.random(rng, field, n), NPoint.random(rng, field, n)
    fg = sm.compose(f, g)
    assert fg.lam == pytest.approx(f.lam * g.lam)
    assert fg(x).isclose(f(g(x)), 1e-10)
    assert hz.distance(f(x), f(y)) == pytest.approx(f.lam * hz.distance(x, y), rel=1e-9)
    assert sm.invert(f)(f(x)).isclose(x, 1e-10)


def test_fixed_point_of_centered_dilation_at_zero():
    p = sm.fixed_point(Similarity.dilation(0.5, C, 2))
    assert p.isclose(NPoint.zero(C, 2))


def test_fixed_point_matches_frozen_oracles():
    f = Similarity(0.5, Rotation.identity(C, 2), NPoint.from_coords([1, 0, 0], C, 2))
    assert np.allclose(sm.fixed_point(f).coords(), FIXED_POINT_SIMPLE, atol=1e-12)
    alpha = [np.cos(np.pi / 3), np.sin(np.pi / 3)]
    g = Similarity(0.5, Rotation.unitary([[[1, 0]]], alpha), NPoint.from_coords([1, 0.5, 0.3], C, 2))
    assert np.allclose(sm.fixed_point(g).coords(), FIXED_POINT_ROTATED, atol=1e-12)


def test_fixed_point_contract(rng):
    for field in FIELDS:
        n = rank_for(field)
        f = random_sim(rng, field, n, lam=0.6)
        p = sm.fixed_point(f, tol=1e-12)
        assert sm.point_gap(f(p), p) <= 1e-12
        g = random_sim(rng, field, n, lam=1.7)
        q = sm.fixed_point(g)
        assert sm.point_gap(g(q), q) <= 1e-11


def test_fixed_point_of_conjugate(rng):
    for field in FIELDS:
        n = rank_for(field)
        f, g = random_sim(rng, field, n, lam=0.5), random_sim(rng, field, n)
        p = sm.fixed_point(sm.conjugate(g, f))
        assert p.isclose(g(sm.fixed_point(f)), 1e-8)


def test_fixed_point_errors(rng):
    with pytest.raises(PreconditionError):
        sm.fixed_point(Similarity.translation(NPoint.random(rng, C, 2)))
    f = Similarity(0.999, Rotation.identity(C, 2), NPoint.from_coords([1, 0, 0], C, 2))
    with pytest.raises(ConvergenceError):
        sm.fixed_point(f, max_iter=10)


def test_centered_dilation(rng):
    assert sm.maps_close(sm.centered_dilation(NPoint.zero(C, 2), 0.3), Similarity.dilation(0.3, C, 2))
    beta = NPoint.random(rng, Field.QUATERNION, 2)
    assert sm.centered_dilation(beta, 0.4)(beta).isclose(beta)
    lhs = sm.compose(sm.centered_dilation(beta, 0.4), sm.centered_dilation(beta, 0.7))
    assert sm.maps_close(lhs, sm.centered_dilation(beta, 0.28), 1e-10)


def test_paper_dilation_examples(rng):
    beta, x = NPoint.random(rng, C, 2), NPoint.random(rng, C, 2)
    assert sm.paper_dilation(beta, 0.3, beta).isclose(beta)
    shift = 2 * alg.im(alg.hermitian(x.u, beta.u))
    assert sm.paper_dilation(beta, 1.0, x).isclose(NPoint(x.u, x.center + shift))
    real_x = NPoint(np.array([[1.5, 0.0]]), x.center)
    real_beta = NPoint(np.array([[0.7, 0.0]]), beta.center)
    assert sm.paper_dilation(real_beta, 1e-12, real_x).isclose(real_beta, 1e-10)


def test_center_solve_examples(rng):
    x = NPoint.random(rng, C, 2)
    assert sm.center_solve(0.3, x, x).isclose(x)
    y = NPoint.from_coords([1, 0, 0], C, 2)
    beta = sm.center_solve(0.5, NPoint.zero(C, 2), y)
    assert np.allclose(beta.coords(), CENTER_SOLVE_EXAMPLE)
    assert np.allclose(sm.center_solve_right(0.5, NPoint.zero(C, 2), y).coords(), CENTER_SOLVE_EXAMPLE)
    with pytest.raises(PreconditionError):
        sm.center_solve(1.0, x, x)


@given(st.sampled_from(FIELDS), seeds, st.floats(0.05, 0.95))
def test_center_solve_round_trips(field, seed, lam):
    rng = np.random.default_rng(seed)
    n = rank_for(field)
    beta, x = unit_sphere_point(rng, field, n), NPoint.random(rng, field, n)
    assert sm.center_solve(lam, x, sm.paper_dilation(beta, lam, x)).isclose(beta, 1e-8)
    y = sm.right_conjugate_dilation(beta, lam, x)
    assert sm.center_solve_right(lam, x, y).isclose(beta, 1e-8)


def test_two_center_solvers_differ_by_the_cross_term(rng):
    lam = 0.4
    beta, x = unit_sphere_point(rng, C, 2), NPoint.random(rng, C, 2)
    y = sm.paper_dilation(beta, lam, x)
    a, b = sm.center_solve(lam, x, y), sm.center_solve_right(lam, x, y)
    assert np.allclose(a.u, b.u)
    cross = alg.im(alg.hermitian(x.u, a.u))
    gap = np.abs(a.center - b.center)
    assert np.allclose(gap, np.abs(2 * lam**2 / (1 - lam**2) * cross), atol=1e-12)


def test_discreteness_witness_found():
    f = sm.centered_dilation(NPoint.zero(C, 2), 0.5)
    g = Similarity.translation(NPoint.from_coords([1, 0, 0], C, 2))
    rep = sm.discreteness_witness(f, g, eps=1e-6, max_n=40)
    assert rep.found
    n, m = rep.pair
    assert n != m and max(n, m) <= 40
    assert rep.distance < 1e-6 and rep.gap_from_identity > 1e-6
    assert len(rep.rotation_parts) == m + 1


def test_discreteness_witness_refusals(rng):
    f = Similarity.dilation(0.5, C, 2)
    rot = Similarity.rotation(hz.random_rotation(rng, C, 2))
    assert sm.discreteness_witness(f, rot).status == "refused"
    g = Similarity.translation(NPoint.from_coords([1, 0, 0], C, 2))
    assert sm.discreteness_witness(rot, g).status == "refused"


def test_discreteness_witness_expanding_f():
    f = Similarity.dilation(2.0, C, 2)
    g = Similarity.translation(NPoint.from_coords([1, 0, 0], C, 2))
    rep = sm.discreteness_witness(f, g)
    assert rep.found and rep.operated_on_inverse


def test_halfspace_examples():
    beta_h = NPoint(np.zeros((1, 2)), np.array([0.0, 1.0]))
    kind = sm.halfspace_classify(beta_h)
    assert isinstance(kind, Horizontal)
    assert np.allclose(kind.xi, [0, 1])
    assert kind.contains(NPoint.zero(C, 2))
    assert not kind.contains(NPoint(np.zeros((1, 2)), np.array([0.0, 2.0])))
    assert sm.visible_in_limit(beta_h, NPoint.zero(C, 2))
    beta_v = NPoint(np.array([[1.0, 0.0]]), np.zeros(2))
    assert isinstance(sm.halfspace_classify(beta_v), Vertical)


def test_halfspace_requires_unit_gauge():
    with pytest.raises(PreconditionError):
        sm.halfspace_classify(NPoint(np.array([[2.0, 0.0]]), np.zeros(2)))


def test_vertical_functional_sees_only_u(rng):
    beta = unit_sphere_point(rng, Field.QUATERNION, 2)
    kind = sm.halfspace_classify(beta)
    x = NPoint.random(rng, Field.QUATERNION, 2)
    moved = NPoint(x.u, x.center + alg.im(alg.random_elements(rng, 4)))
    assert kind.functional(x) == pytest.approx(kind.functional(moved))


@pytest.mark.parametrize("field", FIELDS)
def test_normalizing_rotation_makes_beta1_real_positive(field, rng):
    n = 2 if field is Field.OCTONION else 3
    beta = NPoint.random(rng, field, n)
    r = sm.normalizing_rotation(beta.u)
    out = hz.rotate(r, beta).u
    assert out[0, 0] == pytest.approx(np.sqrt(alg.vnorm2(beta.u)))
    assert np.allclose(out.ravel()[1:], 0, atol=1e-12)


@pytest.mark.parametrize("field", FIELDS)
def test_halfspace_agrees_with_sampling_oracle(field, rng):
    n = 2
    for regime in ("vertical", "horizontal"):
        if field is Field.REAL and regime == "horizontal":
            continue
        b = NPoint.random(rng, field, n)
        if regime == "horizontal":
            b = NPoint(np.zeros_like(b.u), b.center)
        b = hz.dilate(1.0 / hz.gauge_norm(b), b)
        kind = sm.halfspace_classify(b)
        x = NPoint.random(rng, field, n, size=300, scale=2.0)
        keep = kind.boundary_distance(x) > 1e-3
        agree = np.mean(kind.contains(x)[keep] == sm.visible_in_limit(b, x)[keep])
        assert agree >= 0.99
