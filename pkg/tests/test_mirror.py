import numpy as np
import pytest

from tropimirror.examples import LOCAL_P2_POINTS, LOCAL_P2_TRIANGLES, local_p2, single_triangle, trapezoid
from tropimirror.lattice import Triangulation, base_flag, enumerate_flags, flag_coordinates
from tropimirror.mirror import (
    DomainError,
    PreconditionError,
    QValue,
    assign_heights,
    build_mirror_polynomial,
    change_flag,
    check_regime,
    collinear_triples,
    evaluate,
    is_height_certificate,
    ratio_monomial_collinear,
    ratio_monomial_flag,
    sign_rule,
    suggest_q,
)

LP2 = Triangulation(LOCAL_P2_POINTS, LOCAL_P2_TRIANGLES)


def test_polynomial_strings():
    assert str(local_p2()[0]) == "x + y + 1 - q1*x^-1y^-1"
    assert str(trapezoid()[0]) == "x + y + 1 + q1*y^2 - q1*q2*xy"
    H, q = single_triangle()
    assert str(H) == "x + y + 1"
    assert H.p == 0 and q.values == ()


def test_sign_rule_table():
    assert sign_rule((1, 1)) == -1
    assert sign_rule((-1, -1)) == -1
    assert sign_rule((0, 0)) == 1
    assert sign_rule((2, 1)) == 1
    assert sign_rule((1, 0)) == 1


def test_heights():
    assert assign_heights(LP2) == (0, 0, 0, 1)
    assert assign_heights(single_triangle()[0].triangulation) == (0, 0, 0)
    trap = trapezoid()[0].triangulation
    assert is_height_certificate(trap, (0, 0, 0, 1, 2))
    h = assign_heights(trap)
    assert h[:3] == (0, 0, 0) and all(x > 0 for x in h[3:])
    assert is_height_certificate(trap, h)


def test_explicit_exponents():
    H, q = trapezoid(0.25, 0.5)
    vals = H.coefficient_values(q)
    assert vals[3] == pytest.approx(0.25)
    assert vals[4] == pytest.approx(-0.125)


def test_explicit_rejects_bad_matrix():
    with pytest.raises(ValueError, match="non-negative"):
        build_mirror_polynomial(LP2, "explicit", [[-1]])
    with pytest.raises(ValueError, match="constant"):
        build_mirror_polynomial(LP2, "explicit", [[0]])


def test_evaluate_examples():
    H, q = single_triangle()
    assert evaluate(H, q, -1 / 3, -1 / 3) == pytest.approx(1 / 3, abs=1e-15)
    H, q = local_p2(0.01)
    assert evaluate(H, q, 1, 1) == pytest.approx(2.99)
    with pytest.raises(DomainError):
        evaluate(H, q, 0, 1)


def test_real_roots_on_diagonal():
    # on x = y local P2 reduces to 2t^3 + t^2 - q = 0
    H, q = local_p2(0.01)
    roots = np.roots([2, 1, 0, -0.01])
    neg = sorted(r.real for r in roots if abs(r.imag) < 1e-12 and r.real < 0)
    assert neg == pytest.approx([-0.47812838, -0.11378052], abs=1e-7)
    for t in neg:
        assert abs(evaluate(H, q, t, t)) < 1e-12


def test_dominating_monomial_sign():
    H, q = local_p2(0.01)
    # deep in the region of -q/(xy)
    x = y = -np.exp(-4.0)
    assert evaluate(H, q, x, y).real < 0
    assert evaluate(H, q, np.exp(4.0), 0.5).real > 0


def test_base_flag_change_is_identity():
    H, q = local_p2(0.01)
    H2, ch = change_flag(H, base_flag(LP2))
    assert [tuple(p) for p in H2.points] == [tuple(p) for p in H.points]
    assert H2.coefficients == H.coefficients
    assert ch.prefactor.is_constant and ch.prefactor.sign == 1


def test_change_flag_at_minus_one():
    H, q = local_p2(0.01)
    f = next(f for f in enumerate_flags(LP2) if f.origin == 3 and f.first == 2)
    H2, ch = change_flag(H, f)
    pts = [tuple(p) for p in H2.points]
    assert pts[:3] == [(1, 0), (0, 1), (0, 0)]
    assert (3, -1) in pts
    for c in H2.coefficients[:3]:
        assert c.sign == 1 and c.is_constant
    assert H2.follows_sign_rule()


def test_change_flag_identity_numeric():
    rng = np.random.default_rng(3)
    for H, q in (local_p2(0.01), trapezoid(0.1, 0.3)):
        for f in enumerate_flags(H.triangulation):
            H2, ch = change_flag(H, f)
            x = rng.normal(size=10) + 1j * rng.normal(size=10)
            y = rng.normal(size=10) + 1j * rng.normal(size=10)
            xp, yp = ch.forward(q, x, y)
            pre = ch.prefactor.value(q) * x ** ch.shift.m * y ** ch.shift.n
            lhs = evaluate(H, q, x, y)
            rhs = pre * evaluate(H2, q, xp, yp)
            assert np.max(np.abs(lhs - rhs) / np.abs(lhs)) < 1e-12
            xb, yb = ch.inverse(q, xp, yp)
            assert np.allclose(xb, x) and np.allclose(yb, y)
            w = np.column_stack([np.log(np.abs(x)), np.log(np.abs(y))])
            assert np.allclose(ch.inverse_log(q, ch.forward_log(q, w)), w)


def test_ratio_monomials_trapezoid():
    H, q = trapezoid()
    r = ratio_monomial_collinear(H, 2, 1, 3)
    assert str(r) == "q1"
    f = base_flag(H.triangulation)
    assert str(ratio_monomial_flag(H, f, 4)) == "-q1*q2"
    assert sorted(collinear_triples(H.triangulation)) == [(2, 1, 3), (3, 1, 2)]


def test_ratio_monomial_local_p2():
    H, q = local_p2()
    assert str(ratio_monomial_flag(H, base_flag(LP2), 3)) == "-q1"
    with pytest.raises(PreconditionError):
        ratio_monomial_collinear(H, 0, 2, 3)


def test_ratio_with_unit_coordinate_sum():
    # m' + n' = 1 removes the origin coefficient from the ratio
    H, q = trapezoid(0.2, 0.3)
    a = H.coefficient_values(q)
    checked = 0
    for f in enumerate_flags(H.triangulation):
        for i4 in range(H.triangulation.n_points):
            if i4 in f.indices:
                continue
            m, n = flag_coordinates(f, H.points[i4])
            if m + n == 1:
                r = ratio_monomial_flag(H, f, i4)
                assert r.value(q) == pytest.approx(a[i4] / (a[f.first] ** m * a[f.second] ** n))
                checked += 1
    assert checked > 0


def test_auto_heights_ratios_positive():
    from tropimirror.examples import two_holes

    H, q = two_holes()
    t = H.triangulation
    for f in enumerate_flags(t):
        for i4 in range(t.n_points):
            if i4 not in f.indices:
                r = ratio_monomial_flag(H, f, i4)
                assert r.exponents[0] > 0


def test_suggest_q():
    H, _ = local_p2()
    q = suggest_q(H)
    assert q.values == (0.015625,)
    assert all(v is None for v in check_regime(H, QValue((0.01,))).values())
    H, _ = single_triangle()
    assert suggest_q(H).values == ()
    H, _ = trapezoid()
    assert all(v is None for v in check_regime(H, suggest_q(H)).values())
    assert all(v is None for v in check_regime(H, QValue((2 ** -7, 2 ** -7))).values())
