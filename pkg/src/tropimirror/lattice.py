"""Exact lattice geometry in the plane.

Everything here works over ``int`` and :class:`fractions.Fraction`; no
floating point enters the unimodularity, flag or duality computations.
Indices are 0-based in code. Reports add one so that the first point reads
``b1``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Sequence


class LatticePoint(NamedTuple):
    m: int
    n: int

    def __add__(self, other):  # type: ignore[override]
        return LatticePoint(self.m + other[0], self.n + other[1])

    def __sub__(self, other):
        return LatticePoint(self.m - other[0], self.n - other[1])

    def __neg__(self):
        return LatticePoint(-self.m, -self.n)


BASE_POINTS = (LatticePoint(1, 0), LatticePoint(0, 1), LatticePoint(0, 0))


class TriangulationError(ValueError):
    """Raised for structurally malformed input (bad indices, repeated points)."""


def det2(u, v) -> int:
    return u[0] * v[1] - u[1] * v[0]


def cross3(o, a, b) -> int:
    """Twice the signed area of the triangle ``o, a, b``."""
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def primitive(v) -> tuple[int, int]:
    g = math.gcd(int(v[0]), int(v[1]))
    if g == 0:
        raise ValueError("zero vector has no primitive direction")
    return (int(v[0]) // g, int(v[1]) // g)


def convex_hull(points: Iterable[Sequence[int]]) -> list[LatticePoint]:
    """Vertices of the convex hull in counterclockwise order.

    Collinear boundary points are dropped, so only genuine corners are
    returned. The first vertex is the lexicographically smallest one.
    """
    pts = sorted({LatticePoint(int(p[0]), int(p[1])) for p in points})
    if len(pts) <= 2:
        return pts

    def half(seq):
        out: list[LatticePoint] = []
        for p in seq:
            while len(out) >= 2 and cross3(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    return lower[:-1] + upper[:-1]


def polygon_double_area(vertices: Sequence[Sequence[int]]) -> int:
    """Twice the (unsigned) area of a simple polygon, by the shoelace formula."""
    s = 0
    for a, b in zip(vertices, list(vertices[1:]) + [vertices[0]]):
        s += a[0] * b[1] - a[1] * b[0]
    return abs(s)


def _strictly_inside(hull: Sequence[LatticePoint], p) -> bool:
    if len(hull) < 3:
        return False
    return all(cross3(a, b, p) > 0 for a, b in zip(hull, list(hull[1:]) + [hull[0]]))


def _in_closed_hull(hull: Sequence[LatticePoint], p) -> bool:
    if len(hull) < 3:
        return False
    return all(cross3(a, b, p) >= 0 for a, b in zip(hull, list(hull[1:]) + [hull[0]]))


def lattice_points_in_hull(hull: Sequence[LatticePoint]) -> list[LatticePoint]:
    """Brute-force scan of the bounding box; fine for the small polygons we see."""
    if not hull:
        return []
    ms = [p.m for p in hull]
    ns = [p.n for p in hull]
    out = []
    for m in range(min(ms), max(ms) + 1):
        for n in range(min(ns), max(ns) + 1):
            if _in_closed_hull(hull, (m, n)):
                out.append(LatticePoint(m, n))
    return out


@dataclass(frozen=True)
class Triangulation:
    """Lattice points plus triangles given as index triples.

    By convention the first three points are ``(1,0), (0,1), (0,0)``; the
    validator reports a breach instead of refusing construction, so broken
    inputs can still be inspected.
    """

    points: tuple[LatticePoint, ...]
    triangles: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        pts = tuple(LatticePoint(int(p[0]), int(p[1])) for p in self.points)
        tris = tuple(tuple(int(i) for i in t) for t in self.triangles)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "triangles", tris)
        if len(set(pts)) != len(pts):
            dup = next(p for p in pts if pts.count(p) > 1)
            raise TriangulationError(f"point {tuple(dup)} listed twice")
        for k, t in enumerate(tris):
            if len(t) != 3 or len(set(t)) != 3:
                raise TriangulationError(f"triangle #{k + 1} {list(t)} needs three distinct indices")
            for i in t:
                if not 0 <= i < len(pts):
                    raise TriangulationError(
                        f"triangle #{k + 1} {list(t)} references point index {i} "
                        f"outside 0..{len(pts) - 1}"
                    )

    @property
    def n_points(self) -> int:
        return len(self.points)

    @property
    def hull(self) -> list[LatticePoint]:
        return convex_hull(self.points)

    def index(self, b) -> int:
        return self.points.index(LatticePoint(int(b[0]), int(b[1])))

    def edges(self) -> list[tuple[int, int]]:
        """Sorted list of index pairs that are edges of some triangle."""
        es = set()
        for t in self.triangles:
            for i, j in itertools.combinations(t, 2):
                es.add((min(i, j), max(i, j)))
        return sorted(es)

    def triangles_on_edge(self, i: int, j: int) -> list[int]:
        return [k for k, t in enumerate(self.triangles) if i in t and j in t]

    def third_vertex(self, i: int, j: int) -> int:
        """Third vertex of the (unique, for a boundary edge) triangle on ``{i, j}``."""
        ks = self.triangles_on_edge(i, j)
        if not ks:
            raise ValueError(f"{{b{i + 1}, b{j + 1}}} is not an edge")
        t = self.triangles[ks[0]]
        return next(v for v in t if v not in (i, j))

    def hull_sides(self) -> list[list[int]]:
        """Hull sides in counterclockwise order.

        Each side lists the indices of its lattice points from the start
        vertex to the end vertex.
        """
        hull = self.hull
        sides = []
        for a, b in zip(hull, hull[1:] + hull[:1]):
            g = math.gcd(b.m - a.m, b.n - a.n)
            step = ((b.m - a.m) // g, (b.n - a.n) // g)
            side = []
            for r in range(g + 1):
                p = LatticePoint(a.m + r * step[0], a.n + r * step[1])
                side.append(self.points.index(p) if p in self.points else -1)
            sides.append(side)
        return sides


@dataclass
class Violation:
    kind: str
    message: str
    triangle: int | None = None


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def __str__(self):
        if self.ok:
            return "valid"
        return "\n".join(f"{v.kind}: {v.message}" for v in self.violations)


def _tri_label(t, tri) -> str:
    return "(" + ", ".join(f"b{i + 1}={tuple(t.points[i])}" for i in tri) + ")"


def validate_triangulation(t: Triangulation) -> ValidationReport:
    """List every violated invariant of ``t``; an empty report means valid.

    Checks the base-point convention, unimodularity of each triangle, that
    triangles do not overlap and together cover the hull, and that every
    lattice point of the hull is listed and used.
    """
    rep = ValidationReport()
    pts = t.points
    for k, b in enumerate(BASE_POINTS):
        if len(pts) <= k or pts[k] != b:
            got = tuple(pts[k]) if len(pts) > k else None
            rep.violations.append(Violation("convention", f"b{k + 1} must be {tuple(b)}, got {got}"))
    if not t.triangles:
        rep.violations.append(Violation("empty", "no triangles"))
        return rep

    for k, tri in enumerate(t.triangles):
        a = abs(cross3(*(pts[i] for i in tri)))
        if a != 1:
            rep.violations.append(
                Violation(
                    "non-unimodular",
                    f"triangle #{k + 1} {_tri_label(t, tri)} has area {Fraction(a, 2)}",
                    k,
                )
            )
    if t.triangles and pts[:3] == BASE_POINTS and (0, 1, 2) not in {tuple(sorted(x)) for x in t.triangles}:
        rep.violations.append(Violation("convention", "base triangle b1, b2, b3 is not a triangle"))

    # Overlap: edges with more than two triangles, or two triangles on the same
    # side of a shared edge.
    edge_tris: dict[tuple[int, int], list[int]] = {}
    for k, tri in enumerate(t.triangles):
        for i, j in itertools.combinations(tri, 2):
            edge_tris.setdefault((min(i, j), max(i, j)), []).append(k)
    for (i, j), ks in edge_tris.items():
        if len(ks) > 2:
            rep.violations.append(
                Violation("overlap", f"edge b{i + 1}b{j + 1} lies on {len(ks)} triangles", ks[2])
            )
        elif len(ks) == 2:
            o1 = next(v for v in t.triangles[ks[0]] if v not in (i, j))
            o2 = next(v for v in t.triangles[ks[1]] if v not in (i, j))
            s1 = cross3(pts[i], pts[j], pts[o1])
            s2 = cross3(pts[i], pts[j], pts[o2])
            if s1 * s2 > 0:
                rep.violations.append(
                    Violation("overlap", f"triangles #{ks[0] + 1} and #{ks[1] + 1} overlap", ks[1])
                )

    hull = t.hull
    hull_area = polygon_double_area(hull) if len(hull) >= 3 else 0
    tri_area = sum(abs(cross3(*(pts[i] for i in tri))) for tri in t.triangles)
    if tri_area > hull_area:
        rep.violations.append(
            Violation("overlap", f"triangle areas {Fraction(tri_area, 2)} exceed hull area {Fraction(hull_area, 2)}")
        )
    elif tri_area < hull_area:
        rep.violations.append(
            Violation("gap", f"triangles cover {Fraction(tri_area, 2)} of hull area {Fraction(hull_area, 2)}")
        )

    # Interior edges must be shared by two triangles, boundary edges by one.
    for (i, j), ks in edge_tris.items():
        on_boundary = any(
            cross3(a, b, pts[i]) == 0 and cross3(a, b, pts[j]) == 0
            for a, b in zip(hull, hull[1:] + hull[:1])
        )
        if not on_boundary and len(ks) == 1:
            rep.violations.append(
                Violation("gap", f"interior edge b{i + 1}b{j + 1} borders a single triangle", ks[0])
            )

    used = {i for tri in t.triangles for i in tri}
    for i, p in enumerate(pts):
        if i not in used:
            rep.violations.append(Violation("unused-point", f"b{i + 1}={tuple(p)} is not a triangle vertex"))
    listed = set(pts)
    for p in lattice_points_in_hull(hull):
        if p not in listed:
            rep.violations.append(Violation("missing-point", f"hull lattice point {tuple(p)} is not listed"))
    return rep


def interior_lattice_points(t: Triangulation) -> list[LatticePoint]:
    hull = t.hull
    return [p for p in t.points if _strictly_inside(hull, p)]


def genus(t: Triangulation) -> int:
    return len(interior_lattice_points(t))


def side_integer_length(t: Triangulation, side) -> int:
    """Number of lattice points on a hull side minus one.

    ``side`` lists lattice points (or point indices) along the side, as
    :meth:`Triangulation.hull_sides` does; the first and last are its ends.
    """
    side = list(side)
    if len(side) < 2:
        raise ValueError("a side needs two end points")
    a, b = (t.points[s] if isinstance(s, (int,)) and not isinstance(s, bool) else LatticePoint(*s)
            for s in (side[0], side[-1]))
    hull = t.hull
    for u, v in zip(hull, hull[1:] + hull[:1]):
        if cross3(u, v, a) == 0 and cross3(u, v, b) == 0 and a != b:
            return math.gcd(b.m - a.m, b.n - a.n)
    raise ValueError(f"segment {tuple(a)}-{tuple(b)} is not on a side of the hull")


@dataclass(frozen=True)
class Flag:
    """A triangle with a distinguished origin, oriented so the basis has det +1.

    ``origin``, ``first`` and ``second`` are point indices (i3, i1, i2).
    The lattice vectors are kept alongside so flag coordinates can be computed
    without the triangulation.
    """

    origin: int
    first: int
    second: int
    b_origin: LatticePoint
    e1: LatticePoint
    e2: LatticePoint

    def __post_init__(self):
        if det2(self.e1, self.e2) != 1:
            raise ValueError(f"flag basis {tuple(self.e1)}, {tuple(self.e2)} has det {det2(self.e1, self.e2)}")

    @property
    def indices(self) -> tuple[int, int, int]:
        return (self.origin, self.first, self.second)

    @property
    def matrix(self) -> tuple[tuple[int, int], tuple[int, int]]:
        """Integer inverse of the basis matrix; rows map ``b - origin`` to (m', n')."""
        (a, c), (b, d) = self.e1, self.e2  # columns e1, e2
        # inverse of [[a, b], [c, d]] with det 1
        return ((d, -b), (-c, a))

    @classmethod
    def of(cls, t: Triangulation, origin: int, first: int, second: int) -> "Flag":
        o = t.points[origin]
        return cls(origin, first, second, o, t.points[first] - o, t.points[second] - o)


def flag_of_triangle(t: Triangulation, tri, origin: int) -> Flag:
    others = [v for v in tri if v != origin]
    o = t.points[origin]
    u, v = others
    if det2(t.points[u] - o, t.points[v] - o) == 1:
        return Flag.of(t, origin, u, v)
    return Flag.of(t, origin, v, u)


def base_flag(t: Triangulation) -> Flag:
    return Flag.of(t, 2, 0, 1)


def enumerate_flags(t: Triangulation) -> list[Flag]:
    """Three flags per triangle, in triangle order with origins in listed order."""
    return [flag_of_triangle(t, tri, o) for tri in t.triangles for o in tri]


def flag_coordinates(f: Flag, b) -> tuple[int, int]:
    """Integer coordinates of ``b - origin`` in the basis ``(e1, e2)``."""
    d = (b[0] - f.b_origin.m, b[1] - f.b_origin.n)
    (p, q), (r, s) = f.matrix
    return (p * d[0] + q * d[1], r * d[0] + s * d[1])


def from_flag_coordinates(f: Flag, mn) -> LatticePoint:
    return LatticePoint(
        f.b_origin.m + mn[0] * f.e1.m + mn[1] * f.e2.m,
        f.b_origin.n + mn[0] * f.e1.n + mn[1] * f.e2.n,
    )


def flag_coordinate_bound_squared(t: Triangulation) -> int:
    best = 0
    for f in enumerate_flags(t):
        for b in t.points:
            m, n = flag_coordinates(f, b)
            best = max(best, m * m + n * n)
    return best


def flag_coordinate_bound(t: Triangulation) -> float:
    """Largest Euclidean norm of a point's flag coordinates over all flags."""
    return math.sqrt(flag_coordinate_bound_squared(t))


def barycentric(t: Triangulation, tri, b) -> tuple[int, int, int]:
    """Integer barycentric coordinates of ``b`` in a unimodular triangle."""
    i, j, k = tri
    o = t.points[k]
    e1 = t.points[i] - o
    e2 = t.points[j] - o
    d = det2(e1, e2)
    if abs(d) != 1:
        raise ValueError("barycentric coordinates need a unimodular triangle")
    r = (b[0] - o.m, b[1] - o.n)
    lam_i = det2(r, e2) * d
    lam_j = det2(e1, r) * d
    return (lam_i, lam_j, 1 - lam_i - lam_j)


def regular_triangulation(points: Sequence[Sequence[int]], heights: Sequence[float] | None = None,
                          seed: int = 0) -> Triangulation:
    """Triangulate all given lattice points by lifting and taking the lower hull.

    ``points`` must contain the three base points; they are moved to the
    front. Without ``heights`` a perturbed paraboloid is used, which keeps the
    base triangle as a cell. The result is only unimodular if ``points`` is
    the full set of lattice points of its hull.
    """
    import numpy as np
    from scipy.spatial import ConvexHull

    pts = [LatticePoint(int(p[0]), int(p[1])) for p in points]
    rest = [p for p in pts if p not in BASE_POINTS]
    pts = list(BASE_POINTS) + sorted(set(rest), key=rest.index)
    if heights is None:
        rng = np.random.default_rng(seed)
        h = np.array([p.m * p.m + p.n * p.n - p.m - p.n for p in pts], dtype=float)
        h[3:] += 1e-3 * (1 + rng.random(len(pts) - 3))
    else:
        h = np.asarray(heights, dtype=float)
        if len(h) != len(pts):
            raise ValueError("one height per point required")
    if len(pts) == 3:
        return Triangulation(tuple(pts), ((0, 1, 2),))
    lifted = np.column_stack([np.array(pts, dtype=float), h])
    ch = ConvexHull(lifted)
    tris = []
    for simplex, eq in zip(ch.simplices, ch.equations):
        if eq[2] < -1e-12:
            a, b, c = (int(s) for s in simplex)
            if cross3(pts[a], pts[b], pts[c]) != 0:
                tris.append(tuple(sorted((a, b, c))))
    return Triangulation(tuple(pts), tuple(sorted(set(tris))))


# ---------------------------------------------------------------------------
# Cones and abstract cell complexes


Vector = tuple  # of Fraction or int


def _as_frac(v) -> tuple[Fraction, Fraction]:
    return (Fraction(v[0]), Fraction(v[1]))


def _dot(u, v):
    return u[0] * v[0] + u[1] * v[1]


def _nonzero(gens) -> list[tuple[Fraction, Fraction]]:
    return [g for g in (_as_frac(v) for v in gens) if g != (0, 0)]


def cone_contains(gens: Sequence[Vector], x: Vector) -> bool:
    """Exact membership test for the cone spanned by ``gens`` in the plane.

    In two dimensions a point of a cone is a non-negative combination of at
    most two generators, so checking single generators and pairs suffices.
    """
    x = _as_frac(x)
    if x == (0, 0):
        return True
    gs = _nonzero(gens)
    for g in gs:
        if det2(g, x) == 0 and _dot(g, x) > 0:
            return True
    for g, h in itertools.combinations(gs, 2):
        d = det2(g, h)
        if d == 0:
            continue
        a = Fraction(det2(x, h)) / d
        b = Fraction(det2(g, x)) / d
        if a >= 0 and b >= 0:
            return True
    return False


def cone_subset(a: Sequence[Vector], b: Sequence[Vector]) -> bool:
    return all(cone_contains(b, g) for g in a)


def cones_equal(a: Sequence[Vector], b: Sequence[Vector]) -> bool:
    return cone_subset(a, b) and cone_subset(b, a)


def dual_cone(gens: Sequence[Vector]) -> list[tuple[Fraction, Fraction]]:
    """Generators of the polar cone ``{y : <y, g> <= 0 for all g}``.

    This sign convention matches max-plus tropical curves, where the region
    of a dominating term points away from its competitors. In the plane every
    extreme ray of the polar is orthogonal to some generator or is a
    coordinate direction of a linear space, so a finite candidate list
    filtered by the inequalities spans it.
    """
    gs = _nonzero(gens)
    axes = [(Fraction(1), Fraction(0)), (Fraction(-1), Fraction(0)),
            (Fraction(0), Fraction(1)), (Fraction(0), Fraction(-1))]
    if not gs:
        return axes
    cands = []
    for g in gs:
        cands += [(-g[1], g[0]), (g[1], -g[0]), (-g[0], -g[1])]
    cands += axes
    out = []
    for c in cands:
        if all(_dot(c, g) <= 0 for g in gs) and c not in out:
            out.append(c)
    return out


@dataclass
class Cell:
    dim: int
    faces: frozenset = frozenset()  # indices of proper faces
    label: object = None


@dataclass
class Subdivision:
    """A finite cell complex with a cone attached to each incident pair.

    ``cones[(tau, sigma)]`` (for ``tau`` a face of ``sigma`` or equal to it)
    lists integer generators of the cone spanned by ``sigma - x`` for ``x`` in
    ``tau``; for unbounded cells this is the recession-aware cone.
    """

    cells: list[Cell]
    cones: dict[tuple[int, int], list[Vector]]

    def closure(self, s: int) -> frozenset:
        return self.cells[s].faces | {s}

    def index_of(self, label) -> int:
        for k, c in enumerate(self.cells):
            if c.label == label:
                return k
        raise KeyError(label)

    def cone(self, tau: int, sigma: int) -> list[Vector]:
        return self.cones[(tau, sigma)]

    def check(self) -> list[str]:
        """Combinatorial sanity: closure under faces, dimensions, meets."""
        errs = []
        for k, c in enumerate(self.cells):
            for f in c.faces:
                if self.cells[f].dim >= c.dim:
                    errs.append(f"face {f} of cell {k} is not lower-dimensional")
                if not self.cells[f].faces <= c.faces:
                    errs.append(f"faces of face {f} are not faces of cell {k}")
        for a, b in itertools.combinations(range(len(self.cells)), 2):
            common = self.closure(a) & self.closure(b)
            if not common:
                continue
            tops = [c for c in common if self.closure(c) == common]
            if not tops:
                errs.append(f"cells {a} and {b} meet in a non-cell")
        return errs

    @classmethod
    def from_triangulation(cls, t: Triangulation) -> "Subdivision":
        cells = [Cell(0, frozenset(), ("point", i)) for i in range(t.n_points)]
        edge_index = {}
        for e in t.edges():
            edge_index[e] = len(cells)
            cells.append(Cell(1, frozenset(e), ("edge", e)))
        for tri in t.triangles:
            faces = set(tri)
            for i, j in itertools.combinations(tri, 2):
                faces.add(edge_index[(min(i, j), max(i, j))])
            cells.append(Cell(2, frozenset(faces), ("triangle", tuple(sorted(tri)))))

        def verts(k):
            c = cells[k]
            if c.dim == 0:
                return [k]
            return sorted(f for f in c.faces if cells[f].dim == 0)

        cones = {}
        for s, c in enumerate(cells):
            for tau in c.faces | {s}:
                gens = []
                for x in verts(s):
                    for y in verts(tau):
                        v = t.points[x] - t.points[y]
                        if v != (0, 0) and v not in gens:
                            gens.append(v)
                cones[(tau, s)] = gens
        return cls(cells, cones)


@dataclass
class DualityWitness:
    ok: bool
    reason: str = ""
    pair: tuple | None = None


def _check_bijection(s: Subdivision, t: Subdivision, corr) -> list[int]:
    if isinstance(corr, Mapping):
        keys = sorted(corr)
        if keys != list(range(len(s.cells))):
            raise ValueError("correspondence must be defined on every cell")
        image = [corr[k] for k in range(len(s.cells))]
    else:
        image = list(corr)
    if len(image) != len(s.cells) or len(t.cells) != len(s.cells):
        raise ValueError(f"correspondence is not a bijection ({len(s.cells)} cells vs {len(t.cells)})")
    if sorted(image) != list(range(len(t.cells))):
        raise ValueError("correspondence is not a bijection")
    return image


def check_dual_subdivision(s: Subdivision, t: Subdivision, corr) -> DualityWitness:
    """Decide whether ``corr`` exhibits ``t`` as dual to ``s``.

    Checks that inclusions are reversed, that dimensions add to two and that
    for every incident pair ``tau <= sigma`` the cone of ``(tau, sigma)`` is
    the dual of the cone of ``(sigma*, tau*)``. On failure the offending pair
    of cell indices (in ``s``) is returned.
    """
    star = _check_bijection(s, t, corr)
    n = len(s.cells)
    for a in range(n):
        if s.cells[a].dim + t.cells[star[a]].dim != 2:
            return DualityWitness(False, "dimension", (a, a))
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            down = a in s.cells[b].faces
            up = star[b] in t.cells[star[a]].faces
            if down != up:
                return DualityWitness(False, "inclusion", (a, b))
    for b in range(n):
        for a in s.cells[b].faces | {b}:
            mine = s.cone(a, b)
            theirs = t.cone(star[b], star[a])
            if not cones_equal(mine, dual_cone(theirs)):
                return DualityWitness(False, "cone", (a, b))
    return DualityWitness(True)


def inverse_correspondence(corr) -> list[int]:
    image = list(corr.values()) if isinstance(corr, Mapping) else list(corr)
    inv = [0] * len(image)
    for k, v in enumerate(image):
        inv[v] = k
    return inv
