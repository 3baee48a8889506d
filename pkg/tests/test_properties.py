"""Property tests over random triangulated lattice polygons."""

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from tropimirror.amoeba import component_degree, dominance_ratio, ronkin_value
from tropimirror.examples import local_p2
from tropimirror.fanio import FanFile, dumps_fan, loads_fan
from tropimirror.lattice import (
    check_dual_subdivision,
    convex_hull,
    cross3,
    enumerate_flags,
    flag_coordinates,
    from_flag_coordinates,
    interior_lattice_points,
    inverse_correspondence,
    lattice_points_in_hull,
    polygon_double_area,
    regular_triangulation,
    validate_triangulation,
)
from tropimirror.mirror import build_mirror_polynomial, change_flag, evaluate
from tropimirror.realcurve import localize_roots
from tropimirror.tropical import (
    TropicalPolynomial,
    balancing_check,
    duality_correspondence,
    tropical_hypersurface,
)

SETTINGS = settings(max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow])
BASE = [(1, 0), (0, 1), (0, 0)]


@st.composite
def polygons(draw, max_extra=3, span=2):
    extra = draw(st.lists(st.tuples(st.integers(-span, span), st.integers(-span, span)),
                          min_size=1, max_size=max_extra))
    hull = convex_hull(BASE + extra)
    pts = lattice_points_in_hull(hull)
    assume(len(pts) <= 12)
    seed = draw(st.integers(0, 1000))
    t = regular_triangulation(pts, seed=seed)
    assume(validate_triangulation(t).ok)
    return t


def _point_in_hull_strict(hull, p):
    return all(cross3(a, b, p) > 0 for a, b in zip(hull, hull[1:] + hull[:1]))


@SETTINGS
@given(polygons())
def test_flag_round_trip(t):
    for f in enumerate_flags(t):
        for p in t.points:
            mn = flag_coordinates(f, p)
            assert all(isinstance(v, int) for v in mn)
            assert from_flag_coordinates(f, mn) == p


@SETTINGS
@given(polygons())
def test_triangle_areas_sum_to_hull(t):
    assert polygon_double_area(t.hull) == len(t.triangles)
    for tri in t.triangles:
        a, b, c = (t.points[i] for i in tri)
        assert abs(cross3(a, b, c)) == 1


@SETTINGS
@given(polygons())
def test_interior_points_brute_force(t):
    hull = t.hull
    xs = [p.m for p in hull]
    ys = [p.n for p in hull]
    brute = {(m, n) for m in range(min(xs), max(xs) + 1) for n in range(min(ys), max(ys) + 1)
             if _point_in_hull_strict(hull, (m, n))}
    assert set(map(tuple, interior_lattice_points(t))) == brute


def _lifted_curve(t):
    from tropimirror.mirror import assign_heights

    h = np.array(assign_heights(t), dtype=float)
    B = np.array(t.points, dtype=float)
    return tropical_hypersurface(TropicalPolynomial.from_arrays(-h, B))


@SETTINGS
@given(polygons())
def test_duality_of_lifted_spine_is_symmetric(t):
    curve = _lifted_curve(t)
    s, u, corr, missing, extra, problems = duality_correspondence(curve, t)
    assert corr is not None and not missing and not extra
    assert check_dual_subdivision(s, u, corr).ok
    assert check_dual_subdivision(u, s, inverse_correspondence(corr)).ok


@SETTINGS
@given(polygons())
def test_balancing_of_lifted_spine(t):
    assert balancing_check(_lifted_curve(t))


@SETTINGS
@given(polygons(), st.integers(0, 2 ** 31))
def test_flag_change_identity_and_signs(t, seed):
    H = build_mirror_polynomial(t)
    q = H.qvalue((0.3,) if H.p else ())
    rng = np.random.default_rng(seed)
    for f in enumerate_flags(t):
        H2, ch = change_flag(H, f)
        assert H2.follows_sign_rule()
        x = np.exp(rng.normal(size=4) + 1j * rng.uniform(0, 6.3, 4))
        y = np.exp(rng.normal(size=4) + 1j * rng.uniform(0, 6.3, 4))
        xp, yp = ch.forward(q, x, y)
        lhs = evaluate(H, q, x, y)
        rhs = ch.prefactor.value(q) * x ** ch.shift.m * y ** ch.shift.n * evaluate(H2, q, xp, yp)
        scale = sum(abs(c) * np.abs(x) ** m * np.abs(y) ** n
                    for c, (m, n) in zip(H.coefficient_values(q), H.exponents))
        assert np.all(np.abs(lhs - rhs) <= 1e-12 * scale)


@SETTINGS
@given(polygons())
def test_fan_round_trip(t):
    H = build_mirror_polynomial(t)
    coeffs = {"mode": "auto-heights", "q": 0.25} if H.p else {"mode": "auto-heights"}
    fan = FanFile(t, H, H.qvalue((0.25,) if H.p else ()), coeffs)
    again = loads_fan(dumps_fan(fan))
    assert again.triangulation == t
    assert again.polynomial == H
    assert dumps_fan(again) == dumps_fan(fan)


# --- numerical properties on local P2 ---------------------------------------

LP2, Q = local_p2(0.01)


@settings(max_examples=15, deadline=None)
@given(st.floats(-6, 6), st.floats(-6, 6), st.floats(-6, 6), st.floats(-6, 6))
def test_ronkin_midpoint_convexity(a1, a2, b1, b2):
    a, b = np.array([a1, a2]), np.array([b1, b2])
    ra = ronkin_value(LP2, Q, a, grid=128)
    rb = ronkin_value(LP2, Q, b, grid=128)
    rm = ronkin_value(LP2, Q, (a + b) / 2, grid=128)
    slack = ra.error + rb.error + rm.error + 1e-9
    assert rm.value <= (ra.value + rb.value) / 2 + slack


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 3), st.floats(0, 1), st.floats(0, 1), st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi))
def test_degree_constant_on_dominance_segments(i, r1, r2, t1, t2):
    # the sublevel sets of the dominance ratio are convex, so a segment between
    # two points dominated by the same term stays in one complement component
    from tropimirror.amoeba import dominance_certificate

    w0 = dominance_certificate(LP2, Q, i).point
    a = w0 + r1 * np.array([np.cos(t1), np.sin(t1)])
    b = w0 + r2 * np.array([np.cos(t2), np.sin(t2)])
    assume(dominance_ratio(LP2, Q, i, a) < 0.9 and dominance_ratio(LP2, Q, i, b) < 0.9)
    degs = {component_degree(LP2, Q, a + s * (b - a)).degree for s in np.linspace(0, 1, 5)}
    assert degs == {tuple(LP2.exponents[i])}


@settings(max_examples=20, deadline=None)
@given(st.floats(-6, 6), st.floats(-6, 6), st.integers(-3, 3), st.integers(-3, 3))
def test_degree_within_polygon(w1, w2, a1, a2):
    from tropimirror.amoeba import TooCloseToAmoebaError

    try:
        v = component_degree(LP2, Q, (w1, w2)).degree
    except TooCloseToAmoebaError:
        return
    assert a1 * v[0] + a2 * v[1] <= max(a1 * m + a2 * n for m, n in LP2.exponents)


@settings(max_examples=40, deadline=None)
@given(st.floats(-0.19, 0.19).filter(lambda a: abs(a) > 1e-6))
def test_axis_roots_in_disjoint_intervals(a):
    roots, intervals, note = localize_roots([1, 1, a] if a > 0 else [1, 1, abs(a)])
    assert len(roots) == 2
    for r, (lo, hi) in zip(roots, intervals):
        assert lo < r < hi < 0
    (lo0, hi0), (lo1, hi1) = intervals
    assert hi1 < lo0 or hi0 < lo1
