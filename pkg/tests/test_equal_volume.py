from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from nzvolume import (
    BinaryQuadraticForm,
    Coefficient,
    FiberQuery,
    ManifoldNZData,
    Slope,
    automorphisms,
    claim_inequality_holds,
    claim_polynomial_form,
    density_count,
    empirical_error_constant,
    fiber_integer_points,
    gap_bound,
    height,
    preset,
    search_collisions,
    theta_truncated,
)
from nzvolume.equal_volume import (
    AUTOMORPH_INDUCED,
    UNEXPLAINED,
    CollisionRecord,
    EstimationFailedError,
    automorph_orbit,
    classify_collision,
    classify_pair,
    fibers_from_records,
)
from nzvolume.nz_volume import InvalidInputError, ThetaEvaluator
from oracles import C_EMP_150, GAP_BOUND_150

FIG8 = preset("figure8").manifold
WSISTER = preset("whitehead-sister-infty").manifold


def test_gap_bound_examples():
    assert gap_bound(0) == 1
    assert gap_bound(1) == 3
    assert gap_bound(Fraction(12, 5)) == 6
    assert gap_bound(mpmath.mpf("2.4")) == 6
    with pytest.raises(InvalidInputError):
        gap_bound(-1)


@given(st.fractions(min_value=0, max_value=1000, max_denominator=1000))
def test_gap_bound_exceeds_twice_c(C):
    m = gap_bound(C)
    assert m > 2 * C and m - 1 < 2 * C + 1


def test_claim_examples():
    assert claim_inequality_holds(100, 110, 1)
    assert not claim_inequality_holds(100, 100, 1)
    assert not claim_inequality_holds(100, 101, 1)
    with pytest.raises(InvalidInputError):
        claim_inequality_holds(0, 1, 1)
    with pytest.raises(InvalidInputError):
        claim_polynomial_form(10, 0, 1)


@given(
    st.integers(10**3, 10**9),
    st.fractions(min_value=Fraction(1, 1000), max_value=10, max_denominator=1000),
    st.integers(0, 10**6),
)
def test_claim_holds_beyond_twice_c(r, C, extra):
    k = int(2 * C) + 1 + extra
    assert claim_inequality_holds(r, r + k, C)
    assert claim_polynomial_form(r, k, C)


@given(
    st.fractions(min_value=Fraction(1, 100), max_value=10**6, max_denominator=100),
    st.fractions(min_value=Fraction(1, 100), max_value=10**4, max_denominator=100),
    st.fractions(min_value=Fraction(1, 100), max_value=100, max_denominator=100),
)
def test_claim_forms_agree(r, k, C):
    assert claim_inequality_holds(r, r + k, C) == claim_polynomial_form(r, k, C)


def test_empirical_error_constant_regression():
    C = empirical_error_constant(FIG8, 2, 150)
    assert abs(float(C) - C_EMP_150["figure8"]) < 1e-9
    assert gap_bound(C) == GAP_BOUND_150["figure8"]


def test_empirical_error_constant_stabilises():
    a = empirical_error_constant(FIG8, 2, 50)
    b = empirical_error_constant(FIG8, 2, 100)
    assert a > 0 and abs(b - a) < 0.1 * a


def test_empirical_error_constant_zero_and_scaling():
    with pytest.warns(Warning):
        flat = ManifoldNZData("flat", FIG8.cusp_shape, ((3, 0),))
    assert empirical_error_constant(flat, 2, 20) == 0
    doubled = ManifoldNZData("double", FIG8.cusp_shape, (Coefficient(3, 2 * FIG8.coefficients[0].value),))
    a = empirical_error_constant(FIG8, 2, 40)
    b = empirical_error_constant(doubled, 2, 40)
    assert abs(b / a - 2) < 0.05
    with pytest.raises(InvalidInputError):
        empirical_error_constant(FIG8, 1, 20)


def test_estimation_failure():
    wild = ManifoldNZData("wild", FIG8.cusp_shape, ((3, 10**30 * 1j),))
    with pytest.raises(EstimationFailedError):
        empirical_error_constant(wild, 2, 3)


def test_whitehead_sister_bound_three():
    recs = search_collisions(WSISTER, 3, 2, "1e-12")
    pairs = {(r.slope_a, r.slope_b): r for r in recs}
    rec = pairs[(Slope(-2, 1), Slope(1, 2))]
    assert rec.k == 0 and rec.q_a == rec.q_b == 5
    assert rec.classification == AUTOMORPH_INDUCED


def test_figure8_bound_two_pairs_are_reflections():
    recs = search_collisions(FIG8, 2, 2, "1e-15")
    assert recs
    for r in recs:
        a, b = r.slope_a, r.slope_b
        assert b in (Slope(a.p, -a.q).canonical(), Slope(-a.p, a.q).canonical())
        assert r.classification == AUTOMORPH_INDUCED


@pytest.mark.parametrize("name", ["figure8", "figure8-sister", "whitehead-infty", "whitehead-sister-infty"])
def test_bound_one_has_no_unexplained(name):
    recs = search_collisions(preset(name).manifold, 1, 2, 0)
    assert all(r.classification != UNEXPLAINED for r in recs)


def test_bound_zero_is_empty():
    assert search_collisions(FIG8, 0, 2, "1e-9") == []


@pytest.mark.parametrize("name", ["figure8-sister", "whitehead-sister-infty"])
def test_search_invariants(name):
    m = preset(name).manifold
    recs = search_collisions(m, 25, 2, "1e-9")
    hp = ThetaEvaluator(m, 256)
    gap = GAP_BOUND_150[name]
    for r in recs:
        assert r.slope_a < r.slope_b
        assert r.slope_a != -r.slope_b
        assert r.slope_a.is_primitive and r.slope_b.is_primitive
        assert r.k == r.q_a - r.q_b
        assert r.interval_gap_holds()
        assert abs(r.k) <= gap
        a, b = hp.evaluate(r.slope_a, 2), hp.evaluate(r.slope_b, 2)
        assert abs(a.value - b.value) <= mpmath.mpf("1e-9") + a.error_radius + b.error_radius


def test_search_is_exhaustive_against_quadratic_scan():
    m = preset("whitehead-infty").manifold
    tol = mpmath.mpf("1e-6")
    recs = search_collisions(m, 12, 2, "1e-6")
    found = {(r.slope_a, r.slope_b) for r in recs}
    ev = ThetaEvaluator(m)
    vals = {}
    for q in range(0, 13):
        for p in range(-12, 13):
            s = Slope(p, q)
            if s.is_primitive and s == s.canonical():
                v = ev.evaluate(s, 2)
                if v.converged and v.ratio <= 0.25:
                    vals[s] = v
    expected = set()
    keys = sorted(vals)
    for i, a in enumerate(keys):
        for b in keys[i + 1 :]:
            va, vb = vals[a], vals[b]
            if abs(va.value - vb.value) <= tol + va.error_radius + vb.error_radius:
                expected.add((a, b))
    assert found == expected


def test_symmetry_completeness_figure8():
    recs = search_collisions(FIG8, 15, 2, "1e-12")
    found = {(r.slope_a, r.slope_b): r.classification for r in recs}
    ev = ThetaEvaluator(FIG8)
    for q in range(1, 16):
        for p in range(1, 16):
            s = Slope(p, q)
            if not s.is_primitive:
                continue
            t = Slope(-p, q)
            va, vb = ev.evaluate(s, 2), ev.evaluate(t, 2)
            if va.converged and vb.converged and va.ratio <= 0.25 and vb.ratio <= 0.25:
                assert ev.blocks(s, 2) == ev.blocks(t, 2)
                assert found[(t, s)] == AUTOMORPH_INDUCED


def test_determinism_across_jobs():
    a = search_collisions(WSISTER, 20, 2, "1e-9", jobs=1)
    b = search_collisions(WSISTER, 20, 2, "1e-9", jobs=3)
    assert a == b


def test_classification():
    autos = automorphisms(BinaryQuadraticForm(1, 0, 12))
    assert classify_pair(Slope(1, -1), Slope(1, 1), autos) == AUTOMORPH_INDUCED
    assert classify_pair(Slope(1, 2), Slope(2, 1), autos) == UNEXPLAINED
    v = theta_truncated(FIG8, (1, 1), 2)
    rec = CollisionRecord(Slope(-1, 1), Slope(1, 1), v, v, 13, 13, 0, "?", 2, 0)
    assert classify_collision(rec, autos) == AUTOMORPH_INDUCED
    with pytest.raises(ValueError):
        CollisionRecord(Slope(1, 1), Slope(1, 1), v, v, 13, 13, 0, "?", 2, 0)
    with pytest.raises(ValueError):
        CollisionRecord(Slope(-1, 1), Slope(1, 1), v, v, 13, 13, 1, "?", 2, 0)


def test_classify_with_trivial_group():
    v = theta_truncated(FIG8, (1, 1), 2)
    rec = CollisionRecord(Slope(-1, 1), Slope(1, -1), v, v, 13, 13, 0, "?", 2, 0)
    # (1,-1) is -(-1,1): -I is always available
    assert classify_collision(rec, []) != UNEXPLAINED


def test_fiber_examples():
    pts = fiber_integer_points(FIG8, FiberQuery(Slope(1, 2), 0, 3, "1e-9", 2))
    assert pts == [Slope(-1, 2), Slope(1, 2)]
    assert fiber_integer_points(FIG8, FiberQuery(Slope(1, 2), 50, 3, "1e-9", 2)) == []
    for s in [Slope(5, 1), Slope(-3, 7), Slope(1, 0)]:
        got = fiber_integer_points(FIG8, FiberQuery(s, 0, 10, "1e-9", 2))
        assert s.canonical() in got
    with pytest.raises(InvalidInputError):
        FiberQuery(Slope(5, 1), 0, 3, "1e-9", 2)


def test_fiber_agrees_with_search():
    recs = search_collisions(WSISTER, 12, 2, "1e-9")
    fibers = fibers_from_records([r for r in recs if r.k == 0])
    for s, members in fibers.items():
        got = set(fiber_integer_points(WSISTER, FiberQuery(s, 0, 12, "1e-9", 2)))
        assert got == members


def test_automorph_orbit_size():
    autos = automorphisms(BinaryQuadraticForm(1, 0, 1))
    orbit = automorph_orbit(Slope(1, 2), autos)
    assert orbit == {Slope(1, 2), Slope(-1, 2), Slope(2, 1), Slope(-2, 1)}
    assert len(orbit) <= len(autos) // 2


def test_height_and_density():
    assert height((Fraction(3, 2), Fraction(-5, 7))) == 7
    assert height((0, 0)) == 1
    assert height((Fraction(-9), 1)) == 9
    assert density_count([], 5) == 0
    assert density_count([(Fraction(1, 2), 1), (3, 1)], 2) == 1


@given(
    st.lists(
        st.tuples(
            st.fractions(min_value=-20, max_value=20, max_denominator=20),
            st.fractions(min_value=-20, max_value=20, max_denominator=20),
        ),
        max_size=30,
    ),
    st.integers(1, 30),
)
def test_density_monotone(points, T):
    assert density_count(points, T) <= density_count(points, T + 1)
    assert density_count(points, 10**6) == len(points)


def test_stability_flag_when_deeper_terms_exist():
    m = ManifoldNZData("deep", WSISTER.cusp_shape, (WSISTER.coefficients[0], Coefficient(5, 0.01j)))
    recs = search_collisions(m, 6, 2, "1e-9")
    assert recs and all(r.stable_when_deepened is not None for r in recs)
    assert all(r.stable_when_deepened is None for r in search_collisions(WSISTER, 6, 2, "1e-9"))


def test_rational_symmetry_collision_is_unexplained():
    # the whitehead-infty quartic is Q^2 - 32 (pq)^2, so (2a, q) and (2q, a)
    # agree exactly in two terms without an integral automorph linking them
    m = preset("whitehead-infty").manifold
    ev = ThetaEvaluator(m)
    assert ev.blocks((50, 1), 2) == ev.blocks((2, 25), 2)
    recs = search_collisions(m, 50, 2, "1e-12")
    rec = next(r for r in recs if {r.slope_a, r.slope_b} == {Slope(50, 1), Slope(2, 25)})
    assert rec.k == 0 and rec.classification == UNEXPLAINED
