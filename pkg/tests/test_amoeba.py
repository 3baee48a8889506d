import math

import numpy as np
import pytest

from tropimirror.amoeba import (
    Membership,
    amoeba_membership,
    batch_roots,
    component_degree,
    degree_by_root_count,
    dominance_certificate,
    dominance_ratio,
    fiber_coefficients,
    order_map_surjectivity,
    raster_amoeba,
    ronkin_value,
    worker_count,
)
from tropimirror.examples import local_p2, single_triangle, trapezoid
from tropimirror.mirror import evaluate
from tropimirror.tropical import dual_check

L3 = math.log(1 / 3)


@pytest.fixture(scope="module")
def lp2_raster():
    H, q = local_p2(0.01)
    return raster_amoeba(H, q, (-8, 8, -8, 8), 200)


# --- membership and degree --------------------------------------------------


def test_membership_unit_triangle():
    H, q = single_triangle()
    assert amoeba_membership(H, q, (L3, L3)) is Membership.OUTSIDE
    assert amoeba_membership(H, q, (0, 0)) is Membership.INSIDE
    assert amoeba_membership(H, q, (5, 0)) is Membership.OUTSIDE


def test_membership_rejects_few_samples():
    H, q = single_triangle()
    with pytest.raises(ValueError):
        amoeba_membership(H, q, (0, 0), fiber_samples=16)


def test_degree_examples():
    H, q = single_triangle()
    assert component_degree(H, q, (L3, L3)).degree == (0, 0)
    assert component_degree(H, q, (5, 0)).degree == (1, 0)
    assert component_degree(H, q, (0, 5)).degree == (0, 1)
    H, q = local_p2(0.01)
    r = component_degree(H, q, (-3, -3))
    assert r.degree == (-1, -1)
    assert r.winding_check == r.degree
    assert max(abs(x - round(x)) for x in r.residues) < 1e-9


def test_root_count_degree_agrees_with_winding():
    H, q = local_p2(0.01)
    for w in [(-3, -3), (0, 0), (6, 1), (1, 6)]:
        assert degree_by_root_count(H, q, w) == component_degree(H, q, w).degree


def test_fiber_roots_solve_h():
    H, q = local_p2(0.01)
    x = np.exp(0.3 + 1j * np.linspace(0, 6, 7))
    C, low = fiber_coefficients(H, q, x, "y")
    R = batch_roots(C)
    for k in range(len(x)):
        for y in R[k]:
            assert abs(evaluate(H, q, x[k], y)) < 1e-9


def test_batch_roots_matches_numpy():
    rng = np.random.default_rng(0)
    C = rng.normal(size=(5, 4)) + 1j * rng.normal(size=(5, 4))
    R = batch_roots(C)
    for row, c in zip(R, C):
        assert np.allclose(np.sort_complex(row), np.sort_complex(np.roots(c)))


# --- Ronkin function --------------------------------------------------------


def test_ronkin_unit_triangle():
    H, q = single_triangle()
    r = ronkin_value(H, q, (2, 0))
    assert r.value == pytest.approx(2.0, abs=1e-6)
    assert ronkin_value(H, q, (-5, -5)).value == pytest.approx(0.0, abs=1e-12)
    assert ronkin_value(H, q, (0, 7)).value == pytest.approx(7.0, abs=1e-9)


def test_ronkin_gradient_is_degree():
    H, q = local_p2(0.01)
    h = 1e-3
    for w, deg in [((-3, -3), (-1, -1)), ((5, 0), (1, 0)), ((L3, L3), (0, 0))]:
        w = np.array(w, float)
        g = [(ronkin_value(H, q, w + h * e).value - ronkin_value(H, q, w - h * e).value) / (2 * h)
             for e in np.eye(2)]
        assert g == pytest.approx(deg, abs=1e-2)


def test_ronkin_convex_on_segment():
    H, q = local_p2(0.01)
    a, b = np.array([-4.0, -3.0]), np.array([3.0, 2.0])
    ts = np.linspace(0, 1, 9)
    vals = [ronkin_value(H, q, a + t * (b - a)).value for t in ts]
    for k in range(1, len(ts) - 1):
        assert vals[k] <= 0.5 * (vals[k - 1] + vals[k + 1]) + 1e-6


# --- dominance and surjectivity ----------------------------------------------


def test_dominance_examples():
    H, q = single_triangle()
    wit = dominance_certificate(H, q, 2)
    assert wit.point == pytest.approx([L3, L3])
    assert wit.ratio == pytest.approx(2 / 3)
    H, q = local_p2(0.01)
    # 0.01 e^6 is about 4.03, against 1 + 2 e^-3
    assert dominance_ratio(H, q, 3, (-3, -3)) == pytest.approx((1 + 2 * math.exp(-3)) / (0.01 * math.exp(6)))
    assert dominance_ratio(H, q, 3, (-3, -3)) < 1


def test_dominance_far_from_limit():
    H, q = local_p2(10)
    assert dominance_certificate(H, q, 2) is None


def test_surjectivity():
    for (H, q), n in [(local_p2(0.01), 4), (single_triangle(), 3), (trapezoid(), 5)]:
        rep = order_map_surjectivity(H, q)
        assert rep.ok
        assert len(rep.entries) == n


# --- raster -----------------------------------------------------------------


def test_raster_degree_classes(lp2_raster):
    assert lp2_raster.degree_classes() == [(-1, -1), (0, 0), (0, 1), (1, 0)]
    c = lp2_raster.counts()
    assert sum(c.values()) == 200 * 200
    assert c["inside"] > 0


def test_raster_trapezoid_classes():
    H, q = trapezoid()
    box = dual_check(H, q).curve.bbox(3)
    r = raster_amoeba(H, q, box, 200)
    assert r.degree_classes() == [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1)]


def test_raster_deterministic_across_workers(lp2_raster):
    H, q = local_p2(0.01)
    r1 = raster_amoeba(H, q, (-8, 8, -8, 8), 200, workers=1)
    r4 = raster_amoeba(H, q, (-8, 8, -8, 8), 200, workers=4)
    assert np.array_equal(r1.labels, lp2_raster.labels)
    assert np.array_equal(r1.labels, r4.labels)
    assert np.array_equal(r1.degrees, r4.degrees)


def test_raster_validation():
    H, q = local_p2(0.01)
    with pytest.raises(ValueError):
        raster_amoeba(H, q, (-1, 1, -1, 1), 5000)
    with pytest.raises(ValueError):
        raster_amoeba(H, q, (1, -1, -1, 1), 10)


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("TROPIMIRROR_THREADS", "3")
    assert worker_count() == 3
    assert worker_count(2) == 2
    monkeypatch.setenv("TROPIMIRROR_THREADS", "0")
    assert worker_count() >= 1
    monkeypatch.setenv("TROPIMIRROR_THREADS", "many")
    with pytest.raises(ValueError):
        worker_count()
    monkeypatch.setenv("TROPIMIRROR_THREADS", "-2")
    with pytest.raises(ValueError):
        worker_count()
