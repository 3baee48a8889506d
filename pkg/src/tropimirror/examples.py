"""Built-in polynomials used throughout the tests and the README.

Each constructor returns ``(H, q)``.
"""

from __future__ import annotations

from .lattice import Triangulation, regular_triangulation, validate_triangulation
from .mirror import MirrorPolynomial, QValue, as_qvalue, build_mirror_polynomial, polynomial_from_terms

LOCAL_P2_POINTS = ((1, 0), (0, 1), (0, 0), (-1, -1))
LOCAL_P2_TRIANGLES = ((2, 0, 1), (2, 1, 3), (2, 3, 0))


def local_p2(q: float = 0.01):
    """``1 + x + y - q/(xy)`` on the fan of the projective plane."""
    t = Triangulation(LOCAL_P2_POINTS, LOCAL_P2_TRIANGLES)
    H = build_mirror_polynomial(t)
    return H, as_qvalue(q, H.p)


def single_triangle():
    t = Triangulation(((1, 0), (0, 1), (0, 0)), ((0, 1, 2),))
    return build_mirror_polynomial(t), QValue(())


def trapezoid(q1: float = 1 / 128, q2: float = 1 / 128):
    """Genus-zero trapezoid with a side of length two; coefficients ``q1 y^2`` and ``-q1 q2 xy``."""
    t = Triangulation(((1, 0), (0, 1), (0, 0), (0, 2), (1, 1)), ((2, 0, 1), (0, 3, 1), (0, 4, 3)))
    H = build_mirror_polynomial(t, "explicit", [[1, 0], [1, 1]])
    return H, QValue((q1, q2))


def cubic_fan(c: float = -0.02):
    """``1 + x + y + c x^-1 y^3``: genus one with interior point ``(0,1)``."""
    return polynomial_from_terms(((1, 0), (0, 1), (0, 0), (-1, 3)), ((2, 0, 1), (0, 3, 1), (3, 2, 1)), (1, 1, 1, c))


def local_p2_terms(c: float = -0.5):
    """``1 + x + y + c/(xy)`` with an arbitrary numeric coefficient."""
    return polynomial_from_terms(LOCAL_P2_POINTS, LOCAL_P2_TRIANGLES, (1, 1, 1, c))


def square(c: float = 0.5):
    """``1 + x + y + c xy`` on the unit square (ignores the parity sign rule for ``c > 0``)."""
    return polynomial_from_terms(((1, 0), (0, 1), (0, 0), (1, 1)), ((2, 0, 1), (0, 3, 1)), (1, 1, 1, c))


TWO_HOLES_POINTS = ((1, 0), (0, 1), (0, 0), (-1, -1), (0, -1), (1, -1), (2, -1), (3, -1))


def two_holes(q: float | None = None):
    """Genus two: all lattice points of the triangle ``(-1,-1), (3,-1), (0,1)``.

    Interior points ``(0,0)`` and ``(1,0)`` fall in different parity classes.
    """
    heights = [0, 0, 0] + [p[0] ** 2 + 2 * p[1] ** 2 + 0.01 * k for k, p in enumerate(TWO_HOLES_POINTS[3:])]
    t = regular_triangulation(TWO_HOLES_POINTS, [p[0] ** 2 + p[1] ** 2 if k >= 3 else 0
                                                for k, p in enumerate(TWO_HOLES_POINTS)])
    if not validate_triangulation(t).ok:  # pragma: no cover - fixed data
        t = regular_triangulation(TWO_HOLES_POINTS, heights)
    H = build_mirror_polynomial(t)
    if q is None:
        from .mirror import suggest_q

        return H, suggest_q(H)
    return H, as_qvalue(q, H.p)


CATALOGUE = {
    "local-p2": local_p2,
    "single-triangle": single_triangle,
    "trapezoid": trapezoid,
    "cubic-fan": cubic_fan,
    "local-p2-terms": local_p2_terms,
    "square": square,
    "two-holes": two_holes,
}
