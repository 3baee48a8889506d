import itertools
import math

import numpy as np
import pytest

from tropimirror.amoeba import Membership, amoeba_membership, ronkin_value
from tropimirror.examples import local_p2, single_triangle, trapezoid
from tropimirror.mirror import RegimeError, suggest_q
from tropimirror.tropical import (
    TropicalCurve,
    TropicalPolynomial,
    balancing_check,
    dual_check,
    log_series,
    naive_tropicalization,
    spine_coefficients,
    subdivision_of,
    tropical_hypersurface,
)

# values of the spine coefficients for local P2 at q = 0.01, frozen from the
# series and confirmed by the Ronkin integral at the dominance witness
GAMMA_LOCAL_P2 = [0.0, 0.0, -0.02172178, math.log(0.01)]


def _line():
    return tropical_hypersurface(TropicalPolynomial.from_arrays([0, 0, 0], [[1, 0], [0, 1], [0, 0]]))


def _dims(sub):
    dims = [c.dim for c in sub.cells]
    return dims.count(2), dims.count(1), dims.count(0)


# --- corner locus -----------------------------------------------------------


def test_tropical_line():
    c = _line()
    assert len(c.vertices) == 1
    assert np.allclose(c.vertices[0].point, 0)
    assert {e.direction for e in c.rays} == {(1, 1), (-1, 0), (0, -1)}
    assert balancing_check(c)


def test_single_tie_is_a_line():
    c = tropical_hypersurface(TropicalPolynomial.from_arrays([0, 0], [[1, 0], [0, 0]]))
    assert c.vertices == []
    assert len(c.lines) == 1
    assert c.lines[0].direction in {(0, 1), (0, -1)}
    assert abs(c.lines[0].anchor[0]) < 1e-12


def test_equal_slopes_rejected():
    with pytest.raises(ValueError, match="distinct slopes"):
        tropical_hypersurface(TropicalPolynomial.from_arrays([0, 1], [[1, 0], [1, 0]]))


def test_local_p2_spine_shape():
    H, q = local_p2(0.01)
    c = tropical_hypersurface(TropicalPolynomial.from_arrays(spine_coefficients(H, q).gammas, H.exponents))
    assert len(c.vertices) == 3
    assert len(c.bounded_edges) == 3
    assert len(c.rays) == 3
    # the bounded edges form a cycle around the cell of the constant term
    assert all(2 in e.terms for e in c.bounded_edges)
    assert balancing_check(c)


def test_corrupted_curve_is_unbalanced():
    c = _line()
    broken = TropicalCurve(c.polynomial, c.vertices, c.edges[:-1])
    assert not balancing_check(broken)


def test_subdivision_counts():
    assert _dims(subdivision_of(_line())) == (3, 3, 1)
    H, q = local_p2(0.01)
    c = dual_check(H, q).curve
    assert _dims(subdivision_of(c))[0] == 4
    G, q2 = trapezoid()
    assert _dims(subdivision_of(dual_check(G, q2).curve))[0] == 5


# --- series ------------------------------------------------------------------


def test_gamma_local_p2():
    H, q = local_p2(0.01)
    sc = spine_coefficients(H, q)
    assert sc.gammas == pytest.approx(GAMMA_LOCAL_P2, abs=1e-8)
    assert max(sc.tail_bounds) < 1e-6
    assert sc.k_max == [1, 1, 35, 1]


def test_gamma_unit_triangle_vanishes():
    # no sum of (0,0) and (0,1) steps returns to (1,0)
    H, q = single_triangle()
    assert list(spine_coefficients(H, q).gammas) == [0.0, 0.0, 0.0]


def test_empty_series():
    assert log_series([], [], 10) == 0.0
    assert log_series([(1, 0)], [0.5], 0) == 0.0


def _brute_constant_term(offsets, ratios, k):
    total = 0.0
    for tup in itertools.product(range(len(offsets)), repeat=k):
        if np.all(np.sum([offsets[j] for j in tup], axis=0) == 0):
            total += np.prod([ratios[j] for j in tup])
    return total


def test_ordered_tuple_counts():
    # offsets of the three neighbours of the constant term of local P2
    d = [(1, 0), (0, 1), (-1, -1)]
    assert [_brute_constant_term(d, [1, 1, 1], k) for k in (3, 6)] == [6, 90]
    assert math.factorial(9) // math.factorial(3) ** 3 == 1680


def test_log_series_against_brute_force():
    d = [(1, 0), (0, 1), (-1, -1)]
    r = [0.1, -0.2, 0.15]
    expect = sum((-1) ** (k - 1) / k * _brute_constant_term(d, r, k) for k in range(1, 7))
    assert log_series(d, r, 6) == pytest.approx(expect, abs=1e-15)


def test_series_leading_terms():
    # signed series: (3j)!/(j!)^3 tuples of weight (-q)^j at k = 3j
    qq = 1e-4
    H, q = local_p2(qq)
    g = spine_coefficients(H, q, tol=1e-14).gammas[2]
    expect = sum((-1) ** (3 * j - 1) / (3 * j) * math.factorial(3 * j) / math.factorial(j) ** 3 * (-qq) ** j
                 for j in range(1, 6))
    assert expect == pytest.approx(-2 * qq - 15 * qq ** 2 - 560 / 3 * qq ** 3, abs=1e-12)
    assert g == pytest.approx(expect, abs=1e-16)


def test_gamma_close_to_log_coefficient():
    for H, _ in (local_p2(), trapezoid()):
        q = suggest_q(H)
        sc = spine_coefficients(H, q)
        assert np.all(np.abs(sc.corrections) < 1)


def test_gamma_matches_ronkin_on_each_region():
    H, q = local_p2(0.01)
    sc = spine_coefficients(H, q)
    for i, w in enumerate(sc.witnesses):
        r = ronkin_value(H, q, w)
        assert r.value == pytest.approx(sc.gammas[i] + H.exponents[i] @ w, abs=1e-6)


def test_spine_vertices_lie_in_amoeba():
    H, q = local_p2(0.01)
    c = dual_check(H, q).curve
    for v in c.vertices:
        assert amoeba_membership(H, q, v.point) is not Membership.OUTSIDE


def test_naive_tropicalization():
    H, q = local_p2(0.01)
    assert naive_tropicalization(H, q).gammas == pytest.approx([0, 0, 0, math.log(0.01)])


# --- duality -----------------------------------------------------------------


def test_dual_check_examples():
    H, q = local_p2(0.01)
    cert = dual_check(H, q)
    assert cert.ok and cert.verdict == "PASS"
    assert cert.n_one_cells == 6
    G, q2 = trapezoid()
    cert = dual_check(G, q2)
    assert cert.ok and cert.n_one_cells == 7


def test_dual_check_far_from_limit_reports():
    H, q = local_p2(10)
    try:
        cert = dual_check(H, q)
    except RegimeError as e:
        assert "regime" in str(e)
    else:
        assert cert.verdict in ("PASS", "FAIL")
