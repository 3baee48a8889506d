"""Real points of the mirror curve.

Counts components on the compactified real surface, checks the cyclic-M
conditions, localizes the points where the curve meets the toric axes and
traces the boundary arcs through the flag charts.

Axis points are labelled by the boundary edge ``(i, j)`` of the
triangulation whose two terms balance there; a side of integer length ``d``
carries ``d`` of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .amoeba import batch_roots, fiber_coefficients, worker_count
from .lattice import (
    Flag,
    LatticePoint,
    Triangulation,
    convex_hull,
    det2,
    flag_coordinate_bound,
    flag_of_triangle,
    interior_lattice_points,
    lattice_points_in_hull,
    flag_coordinates,
    primitive,
    _strictly_inside,
)
from .mirror import MirrorPolynomial, PreconditionError, RegimeError, change_flag, evaluate
from .tropical import TropicalCurve, naive_tropicalization, tropical_hypersurface, tropical_polynomial

QUADRANTS = ((1, 1), (-1, 1), (-1, -1), (1, -1))


def quadrant_of_domain_component(b, t: Triangulation | None = None) -> tuple[int, int]:
    """Sign pattern ``(sign x, sign y)`` of the oval attached to interior point ``b``."""
    b = LatticePoint(int(b[0]), int(b[1]))
    if t is not None and b not in interior_lattice_points(t):
        raise ValueError(f"{tuple(b)} is not an interior lattice point")
    m_odd, n_odd = b.m % 2 == 1, b.n % 2 == 1
    if not m_odd and not n_odd:
        return (-1, -1)
    if m_odd and n_odd:
        return (1, 1)
    if n_odd:
        return (1, -1)
    return (-1, 1)


def default_c(D: float) -> float:
    return 0.5 * ((4 / 3) ** (1 / (2 * D)) - 1)


def domain_component_test(H: MirrorPolynomial, q, z, i: int, c: float | None = None) -> bool:
    """Whether ``(1+c)|term_i(z)| > |term_j(z)|`` for every other term."""
    D = flag_coordinate_bound(H.triangulation)
    if c is None:
        c = default_c(D)
    if not c > 0 or (1 + c) ** (2 * D) >= 4 / 3:
        raise PreconditionError(f"c={c} must satisfy c > 0 and (1+c)^(2D) < 4/3 with D={D:.4g}")
    la = H.log_abs_coefficients(q)
    E = H.exponents
    lz = np.log(np.abs(np.asarray(z, dtype=float)))
    L = la + E @ lz
    others = np.delete(L, i)
    return bool(np.all(math.log1p(c) + L[i] > others))


def _flag_with_origin(t: Triangulation, i: int) -> Flag:
    for tri in t.triangles:
        if i in tri:
            return flag_of_triangle(t, tri, i)
    raise ValueError(f"b{i + 1} is on no triangle")


@dataclass
class DomainComponent:
    index: int
    point: tuple[int, int]
    sample: tuple[float, float]
    quadrant: tuple[int, int]
    crossing: tuple[float, float]  # chart diagonal parameters bracketing a zero


def find_domain_components(H: MirrorPolynomial, q) -> dict[int, DomainComponent]:
    """A certified sample inside the oval of each interior lattice point.

    In the chart of a flag with origin ``b`` the point ``(-1/3, -1/3)`` is
    mapped back to the torus; the dominance inequality is checked there, and a
    sign change of ``H`` along the chart diagonal certifies a real zero
    between the sample and the boundary of the dominance region.
    """
    t = H.triangulation
    qv = H.qvalue(q)
    out = {}
    for b in interior_lattice_points(t):
        i = t.index(b)
        f = _flag_with_origin(t, i)
        H2, ch = change_flag(H, f)
        x, y = ch.inverse(qv, -1 / 3, -1 / 3)
        z = (float(np.real(x)), float(np.real(y)))
        if not domain_component_test(H, qv, z, i):
            raise RegimeError(f"domain certificate fails for b{i + 1}={tuple(b)}")
        h0 = float(np.real(evaluate(H2, qv, -1 / 3, -1 / 3)))
        ts = np.geomspace(1 / 3, 3.0, 400)
        vals = np.real(evaluate(H2, qv, -ts, -ts))
        if not h0 > 0:
            raise RegimeError(f"chart value at (-1/3,-1/3) is not positive for b{i + 1}")
        neg = np.nonzero(vals < 0)[0]
        if len(neg) == 0:
            raise RegimeError(f"no sign change along the chart diagonal for b{i + 1}")
        k = neg[0]
        quad = (int(np.sign(z[0])), int(np.sign(z[1])))
        expected = quadrant_of_domain_component(b)
        if quad != expected:
            raise RegimeError(f"oval sample for b{i + 1} is in quadrant {quad}, expected {expected}")
        out[i] = DomainComponent(i, tuple(b), z, quad, (float(ts[k - 1]), float(ts[k])))
    return out


# ---------------------------------------------------------------------------
# sides and axis restrictions


@dataclass
class SideChart:
    side: int  # index into Triangulation.hull_sides()
    points: list[int]  # lattice points of the side in clockwise order
    flag: Flag

    @property
    def length(self) -> int:
        return len(self.points) - 1


def _chart_flag(t: Triangulation, origin: int, along: int) -> Flag:
    """Flag with the given origin whose second basis vector runs to ``along``."""
    third = t.third_vertex(origin, along)
    f = Flag.of(t, origin, third, along) if det2(t.points[third] - t.points[origin],
                                                 t.points[along] - t.points[origin]) == 1 else None
    if f is None:
        raise ValueError(f"edge b{origin + 1}b{along + 1} has its triangle on the wrong side")
    return f


def side_charts(t: Triangulation) -> list[SideChart]:
    """One chart per hull side, sending the side onto the ``y``-axis with ``m >= 0``."""
    out = []
    for k, side in enumerate(t.hull_sides()):
        if -1 in side:
            raise ValueError("hull side lattice point missing from the triangulation")
        cw = side[::-1]
        out.append(SideChart(k, cw, _chart_flag(t, cw[0], cw[1])))
    return out


@dataclass
class AxisRestriction:
    side: int
    coefficients: np.ndarray  # low degree first
    chart: SideChart

    def __call__(self, y):
        return np.polynomial.polynomial.polyval(y, self.coefficients)


def _resolve_side(t: Triangulation, side) -> int:
    sides = t.hull_sides()
    if isinstance(side, (int, np.integer)):
        if not 0 <= side < len(sides):
            raise ValueError(f"side index {side} out of range")
        return int(side)
    a, b = (LatticePoint(*p) for p in side)
    ia, ib = t.index(a), t.index(b)
    for k, s in enumerate(sides):
        if {s[0], s[-1]} == {ia, ib}:
            return k
    raise ValueError(f"{tuple(a)}-{tuple(b)} is not a side of the hull")


def axis_restriction(H: MirrorPolynomial, q, side) -> AxisRestriction:
    """Restriction of ``H`` to the axis of a hull side, in the side's chart."""
    t = H.triangulation
    k = _resolve_side(t, side)
    sc = side_charts(t)[k]
    qv = H.qvalue(q)
    H2, _ = change_flag(H, sc.flag)
    # points of H2 are permuted; find the side points by coordinates
    coeffs = np.zeros(sc.length + 1)
    vals = H2.coefficient_values(qv)
    for p, c in zip(H2.points, vals):
        if p.m == 0:
            if not 0 <= p.n <= sc.length:
                raise AssertionError("side chart does not place the side on 0..k")
            coeffs[p.n] = c
        elif p.m < 0:
            raise AssertionError("side chart has a point with m < 0")
    return AxisRestriction(k, coeffs, sc)


@dataclass
class AxisEntry:
    side: int
    length: int
    roots: list[float]
    intervals: list[tuple[float, float]]
    ok: bool
    note: str = ""


def localize_roots(coeffs, tol: float = 1e-10) -> tuple[list[float], list[tuple[float, float]], str]:
    """Certified negative roots of ``sum c_r y^r`` on the intervals around ``-c_r/c_{r+1}``.

    Returns roots, intervals and an empty note on success; the note names
    the first failing interval otherwise.
    """
    c = np.asarray(coeffs, dtype=float)
    f = lambda y: np.polynomial.polynomial.polyval(y, c)  # noqa: E731
    roots, ivs = [], []
    for r in range(len(c) - 1):
        if c[r] == 0 or c[r + 1] == 0:
            return roots, ivs, f"zero coefficient at degree {r}"
        ratio = c[r] / c[r + 1]
        lo, hi = sorted((float(-2 * ratio), float(-0.5 * ratio)))
        flo, fhi = f(lo), f(hi)
        ivs.append((lo, hi))
        if not flo * fhi < 0:
            return roots, ivs, f"no sign change on interval {r} ({lo:.6g}, {hi:.6g})"
        while hi - lo > tol * max(1.0, abs(lo)):
            mid = 0.5 * (lo + hi)
            fm = f(mid)
            if fm == 0:
                lo = hi = mid
                break
            if (fm < 0) == (flo < 0):
                lo, flo = mid, fm
            else:
                hi = mid
        roots.append(float(0.5 * (lo + hi)))
    for (a1, b1), (a2, b2) in zip(ivs, ivs[1:]):
        if not (b2 < a1 or b1 < a2):
            return roots, ivs, "intervals overlap"
    if any(r >= 0 for r in roots):
        return roots, ivs, "non-negative root"
    return roots, ivs, ""


def axis_root_localization(H: MirrorPolynomial, q, side) -> AxisEntry:
    ar = axis_restriction(H, q, side)
    roots, ivs, note = localize_roots(ar.coefficients)
    return AxisEntry(ar.side, ar.chart.length, roots, ivs, not note, note)


def real_negative_roots(coeffs) -> np.ndarray:
    """Distinct real roots (any sign) of a low-first coefficient vector."""
    r = np.roots(np.asarray(coeffs, dtype=float)[::-1])
    real = np.sort(r[np.abs(r.imag) <= 1e-9 * (1 + np.abs(r))].real)
    return real


# ---------------------------------------------------------------------------
# marching squares


def _signed_grid(H: MirrorPolynomial, q, U, V, sx, sy):
    """``H`` at ``(sx e^U, sy e^V)`` divided by its largest term (safe from overflow)."""
    la = H.log_abs_coefficients(q)
    s = H.signs()
    E = H.exponents
    Ls = [la[j] + E[j, 0] * U + E[j, 1] * V for j in range(len(E))]
    M = np.maximum.reduce(Ls)
    out = np.zeros_like(M)
    for j in range(len(E)):
        sign = s[j] * (sx ** (E[j, 0] % 2)) * (sy ** (E[j, 1] % 2))
        out += sign * np.exp(Ls[j] - M)
    return out


@dataclass
class Piece:
    """A connected piece of the real curve inside the box and one quadrant."""

    quadrant: tuple[int, int]
    segments: np.ndarray  # (k, 2, 2) in log coordinates
    exits: list[tuple[float, float]]
    exit_labels: list[tuple[int, int] | None]

    @property
    def is_oval(self) -> bool:
        return not self.exits


def _march(val, u, v, center):
    """Segments and connected pieces of ``val == 0`` on a grid.

    ``val[i, j]`` is sampled at ``(u[i], v[j])``; ``center`` holds
    the value at cell centres, used to resolve saddle cells.
    """
    nu, nv = val.shape
    pos = val > 0
    NH = (nu - 1) * nv
    NV = nu * (nv - 1)

    def hid(i, j):
        return i * nv + j

    def vid(i, j):
        return NH + i * (nv - 1) + j

    # crossings per edge
    hx = pos[:-1, :] != pos[1:, :]
    vx = pos[:, :-1] != pos[:, 1:]
    # node positions
    with np.errstate(divide="ignore", invalid="ignore"):
        th = val[:-1, :] / (val[:-1, :] - val[1:, :])
        tv = val[:, :-1] / (val[:, :-1] - val[:, 1:])
    du = np.diff(u)[:, None]
    dv = np.diff(v)[None, :]
    pos_h = np.stack([u[:-1, None] + th * du, np.broadcast_to(v[None, :], th.shape)], axis=-1)
    pos_v = np.stack([np.broadcast_to(u[:, None], tv.shape), v[None, :-1] + tv * dv], axis=-1)
    coords = np.concatenate([pos_h.reshape(-1, 2), pos_v.reshape(-1, 2)])

    I, J = np.meshgrid(np.arange(nu - 1), np.arange(nv - 1), indexing="ij")
    bottom = hx[:, :-1]
    top = hx[:, 1:]
    left = vx[:-1, :]
    right = vx[1:, :]
    eb, et = hid(I, J), hid(I, J + 1)
    el, er = vid(I, J), vid(I + 1, J)
    cnt = bottom.astype(int) + top + left + right
    pairs = []
    two = cnt == 2
    for m1, e1, m2, e2 in (
        (bottom, eb, top, et), (bottom, eb, left, el), (bottom, eb, right, er),
        (top, et, left, el), (top, et, right, er), (left, el, right, er),
    ):
        sel = two & m1 & m2
        pairs.append(np.stack([e1[sel], e2[sel]], axis=1))
    four = cnt == 4
    if four.any():
        a_pos = pos[:-1, :-1]
        c_pos = center > 0
        joined = four & (c_pos == a_pos)  # a and d connected through the centre
        split = four & (c_pos != a_pos)
        pairs.append(np.stack([eb[joined], er[joined]], axis=1))
        pairs.append(np.stack([el[joined], et[joined]], axis=1))
        pairs.append(np.stack([eb[split], el[split]], axis=1))
        pairs.append(np.stack([et[split], er[split]], axis=1))
    P = np.concatenate(pairs) if pairs else np.zeros((0, 2), dtype=int)
    N = NH + NV
    active = np.concatenate([hx.reshape(-1), vx.reshape(-1)])
    adj = coo_matrix((np.ones(len(P)), (P[:, 0], P[:, 1])), shape=(N, N))
    _, lab = connected_components(adj, directed=False)
    boundary = np.zeros(N, dtype=bool)
    hb = np.zeros_like(hx)
    hb[:, 0] = hb[:, -1] = True
    vb = np.zeros_like(vx)
    vb[0, :] = vb[-1, :] = True
    boundary[:NH] = hb.reshape(-1)
    boundary[NH:] = vb.reshape(-1)
    comps = {}
    for node in np.nonzero(active)[0]:
        comps.setdefault(lab[node], []).append(node)
    seg_comp = lab[P[:, 0]] if len(P) else np.zeros(0, dtype=int)
    out = []
    for c, nodes in comps.items():
        nodes = np.array(nodes)
        segs = P[seg_comp == c]
        exits = nodes[boundary[nodes]]
        out.append((coords[segs], [tuple(coords[e]) for e in exits]))
    return out


def _exit_label(H: MirrorPolynomial, q, w, boundary_edges) -> tuple[int, int] | None:
    la = H.log_abs_coefficients(q)
    L = la + H.exponents @ np.asarray(w, dtype=float)
    order = np.argsort(L)[::-1]
    i, j = int(order[0]), int(order[1])
    if len(L) > 2 and L[order[2]] > L[order[1]] - math.log(4):
        return None
    e = (min(i, j), max(i, j))
    return e if e in boundary_edges else None


def boundary_edges(t: Triangulation) -> list[tuple[int, int]]:
    """Unit boundary segments in counterclockwise order."""
    out = []
    for side in t.hull_sides():
        for a, b in zip(side, side[1:]):
            out.append((min(a, b), max(a, b)))
    return out


def component_box(H: MirrorPolynomial, q, pad: float = 5.0):
    """Log-coordinate box: bounding box of the spine vertices padded by ``pad``."""
    try:
        T = tropical_polynomial(H, q)
    except RegimeError:
        T = naive_tropicalization(H, q)
    curve = tropical_hypersurface(T)
    return curve.bbox(pad)


@dataclass
class Oval:
    quadrant: tuple[int, int]
    sample: tuple[float, float]
    domain_point: int | None = None


@dataclass
class ComponentReport:
    ovals: list[Oval]
    unbounded: int  # components meeting the axes
    total: int
    genus: int
    is_m_curve: bool
    cycles: list[list[tuple[int, int]]]  # axis points in order along each unbounded component
    pieces: list[Piece]
    box: tuple[float, float, float, float]
    grid_res: int
    uncertain: int = 0
    irregular: list[str] = field(default_factory=list)

    def ovals_in(self, quadrant) -> list[Oval]:
        return [o for o in self.ovals if o.quadrant == tuple(quadrant)]


def _contains(segments: np.ndarray, p) -> bool:
    """Even-odd test of ``p`` against a closed polyline given as segments."""
    if len(segments) == 0:
        return False
    a = segments[:, 0]
    b = segments[:, 1]
    px, py = p
    cond = (a[:, 1] > py) != (b[:, 1] > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = a[:, 0] + (py - a[:, 1]) * (b[:, 0] - a[:, 0]) / (b[:, 1] - a[:, 1])
    return bool(np.sum(cond & (xint > px)) % 2)


def _cycles(nodes, pieces_edges, irregular):
    """Split the axis-point graph into components and walk each as a cycle."""
    adj: dict = {n: [] for n in nodes}
    for k, (a, b) in enumerate(pieces_edges):
        adj.setdefault(a, []).append((b, k))
        adj.setdefault(b, []).append((a, k))
    seen = set()
    cycles = []
    for start in sorted(adj):
        if start in seen:
            continue
        # component by DFS
        comp, stack = [], [start]
        seen.add(start)
        while stack:
            n = stack.pop()
            comp.append(n)
            for m, _ in adj[n]:
                if m not in seen:
                    seen.add(m)
                    stack.append(m)
        if any(len(adj[n]) != 2 for n in comp):
            irregular.append(f"axis points {sorted(comp)} do not form a simple cycle")
            cycles.append(sorted(comp))
            continue
        order = [start]
        used = set()
        cur = start
        while True:
            nxt = [(m, k) for m, k in adj[cur] if k not in used]
            if not nxt:
                break
            m, k = nxt[0]
            used.add(k)
            if m == start:
                break
            order.append(m)
            cur = m
        cycles.append(order)
    return cycles


def count_real_components(H: MirrorPolynomial, q, grid_res: int = 512, box=None) -> ComponentReport:
    """Components of the real curve on the compactified real toric surface."""
    if grid_res < 256:
        raise ValueError("grid_res must be at least 256")
    qv = H.qvalue(q)
    if box is None:
        rep = _count(H, qv, grid_res, component_box(H, qv))
        if any("unidentified" in m for m in rep.irregular):
            rep = _count(H, qv, grid_res, component_box(H, qv, pad=10.0))
        return rep
    return _count(H, qv, grid_res, box)


def _count(H: MirrorPolynomial, qv, grid_res: int, box) -> ComponentReport:
    t = H.triangulation
    x0, x1, y0, y1 = box
    bedges = set(boundary_edges(t))

    def sample(res):
        u = np.linspace(x0, x1, res)
        v = np.linspace(y0, y1, res)
        U, V = np.meshgrid(u, v, indexing="ij")
        uc = 0.5 * (u[:-1] + u[1:])
        vc = 0.5 * (v[:-1] + v[1:])
        UC, VC = np.meshgrid(uc, vc, indexing="ij")
        grids = {}
        bad = 0
        for sx, sy in QUADRANTS:
            val = _signed_grid(H, qv, U, V, sx, sy)
            cen = _signed_grid(H, qv, UC, VC, sx, sy)
            bad += int(np.sum(np.abs(val) < 1e-12))
            grids[(sx, sy)] = (val, cen)
        return u, v, grids, bad

    u, v, grids, bad = sample(grid_res)
    if bad:
        u, v, grids, bad = sample(grid_res + 1)

    pieces: list[Piece] = []
    for quad, (val, cen) in grids.items():
        for segs, exits in _march(val, u, v, cen):
            labels = [_exit_label(H, qv, e, bedges) for e in exits]
            pieces.append(Piece(quad, segs, exits, labels))

    irregular = []
    ovals = [Oval(p.quadrant, tuple(p.segments[0, 0]) if len(p.segments) else (math.nan, math.nan))
             for p in pieces if p.is_oval]
    oval_pieces = [p for p in pieces if p.is_oval]
    edges = []
    nodes = set()
    for p in pieces:
        if p.is_oval:
            continue
        if any(lab is None for lab in p.exit_labels):
            irregular.append(f"unidentified box exit in quadrant {p.quadrant}")
        labs = [lab for lab in p.exit_labels if lab is not None]
        nodes.update(labs)
        if len(labs) == 2:
            edges.append((labs[0], labs[1]))
        elif labs:
            irregular.append(f"piece in quadrant {p.quadrant} has {len(labs)} exits")
            for a in labs[1:]:
                edges.append((labs[0], a))
    cycles = _cycles(sorted(nodes), edges, irregular)

    # match ovals against domain samples
    try:
        dom = find_domain_components(H, qv)
    except RegimeError:
        dom = {}
    for i, dc in dom.items():
        w = (math.log(abs(dc.sample[0])), math.log(abs(dc.sample[1])))
        for o, p in zip(ovals, oval_pieces):
            if o.quadrant == dc.quadrant and _contains(p.segments, w):
                o.domain_point = i
    g = len(interior_lattice_points(t))
    total = len(ovals) + len(cycles)
    if total > g + 1:
        irregular.append(f"{total} components exceed the Harnack bound {g + 1}")
    return ComponentReport(
        ovals=ovals,
        unbounded=len(cycles),
        total=total,
        genus=g,
        is_m_curve=(total == g + 1 and not irregular),
        cycles=cycles,
        pieces=pieces,
        box=tuple(float(b) for b in box),
        grid_res=grid_res,
        uncertain=bad,
        irregular=irregular,
    )


# ---------------------------------------------------------------------------
# arc tracing


@dataclass
class Arc:
    kind: str  # "side" or "corner"
    axes: tuple[int, ...]  # hull sides met
    ends: tuple[tuple[int, int], tuple[int, int]]  # axis points joined
    ok: bool
    samples: int
    note: str = ""
    points: np.ndarray | None = None  # (k, 4): log|x|, log|y|, sign x, sign y


@dataclass
class ArcCensus:
    arcs: list[Arc]

    @property
    def ok(self) -> bool:
        return all(a.ok for a in self.arcs)

    def adjacency(self) -> set[frozenset]:
        return {frozenset(a.ends) for a in self.arcs if a.ends[0] != a.ends[1]}


def _least_nonpositive_root(C: np.ndarray) -> np.ndarray:
    """Least-norm real non-positive root per row; nan when there is none."""
    R = batch_roots(C)
    real = np.abs(R.imag) <= 1e-8 * (1 + np.abs(R))
    ok = real & (R.real <= 0) & np.isfinite(R)
    mag = np.where(ok, np.abs(R), np.inf)
    k = np.argmin(mag, axis=1)
    out = R.real[np.arange(len(R)), k]
    out[~np.isfinite(mag.min(axis=1))] = np.nan
    return out


def _x_polynomial(H2: MirrorPolynomial, q, ys):
    """Rows: ``H2(., y)`` as polynomials in ``x`` (chart has only ``m >= 0``)."""
    C, low = fiber_coefficients(H2, q, ys, solve_for="x")
    if low < 0:
        raise AssertionError("chart has negative x exponents")
    return C


def _trace(H2, q, ys, jump_factor: float = 10.0):
    """Trace ``h(y)``; returns ``(h, ok, note)``."""
    h = _least_nonpositive_root(_x_polynomial(H2, q, ys))
    if np.isnan(h).any():
        k = int(np.nonzero(np.isnan(h))[0][0])
        return h, False, f"no non-positive real root at y={ys[k]:.6g}"
    if np.any(h >= 0):
        k = int(np.nonzero(h >= 0)[0][0])
        return h, False, f"arc meets the axis at interior y={ys[k]:.6g}"
    # jump detection on log|h|: consecutive steps in log|y| are uniform, so a
    # smooth branch changes log|h| by a bounded multiple of the step
    lh = np.log(-h)
    ly = np.log(-ys)
    dly = np.abs(np.diff(ly))
    dlh = np.abs(np.diff(lh))
    # derivative estimate from neighbours, robust to the endpoint blow-up
    ref = np.maximum(np.convolve(dlh, np.ones(5) / 5, mode="same"), dly)
    bad = np.nonzero(dlh > jump_factor * ref + 10 * dly)[0]
    for k in bad:
        fine = np.geomspace(-ys[k], -ys[k + 1], 65) * -1
        hf = _least_nonpositive_root(_x_polynomial(H2, q, fine))
        if np.isnan(hf).any() or np.max(np.abs(np.diff(np.log(-hf)))) > 0.5 * dlh[k]:
            return h, False, f"root-continuation jump near y={ys[k]:.6g}"
    return h, True, ""


def _columns_by_m(H2: MirrorPolynomial, q):
    """``{m: [(n, coefficient), ...]}`` for the chart polynomial."""
    cols: dict = {}
    for p, c in zip(H2.points, H2.coefficient_values(q)):
        cols.setdefault(int(p.m), []).append((int(p.n), float(c)))
    return cols


def _scaled_x_roots(cols, ell, t_sign, lam):
    """Least-norm non-positive real root of ``H2(., t)`` with ``log|t| = ell``, in logs.

    Each coefficient ``sum_n a_n t^n`` is factored as ``t^n0 (a_n0 + ...)``
    and ``x`` is rescaled by ``e^lam`` so that tiny ``t`` cannot underflow.
    Returns ``log|h|`` with nan where no such root exists.
    """
    ms = sorted(cols)
    deg = ms[-1]
    logc = np.full((len(ell), deg + 1), -np.inf)
    sgn = np.zeros((len(ell), deg + 1))
    for m in ms:
        terms = sorted(cols[m])
        n0 = terms[0][0]
        br = np.zeros(len(ell))
        for n, c in terms:
            br += c * (t_sign ** (n - n0)) * np.exp((n - n0) * ell)
        logc[:, m] = n0 * ell + np.log(np.abs(br)) + m * lam
        sgn[:, m] = np.sign(br) * t_sign ** (n0 % 2)
    top = logc.max(axis=1, keepdims=True)
    C = (sgn * np.exp(logc - top))[:, ::-1]
    R = batch_roots(C.astype(complex))
    real = np.abs(R.imag) <= 1e-8 * (1 + np.abs(R))
    good = real & (R.real < 0) & np.isfinite(R)
    mag = np.where(good, np.abs(R), np.inf)
    best = mag.min(axis=1)
    out = np.log(best) + lam
    out[~np.isfinite(best)] = np.nan
    return out


def _jumps(lh, ell, jump_factor=10.0):
    d_ell = np.abs(np.diff(ell))
    d_lh = np.abs(np.diff(lh))
    ref = np.maximum(np.convolve(d_lh, np.ones(5) / 5, mode="same"), d_ell)
    return np.nonzero(d_lh > jump_factor * ref + 10 * d_ell)[0]


def _trace_corner(H2, q, s, w, u1, step, depth, max_depth: float = 400.0):
    """Trace ``t -> h(t)`` from the axis root ``s`` towards ``t = 0``.

    Stops once ``h^w1 t^w2`` agrees with ``u1`` to 1e-3 (relative), at least
    ``depth`` below ``log|s|``. Returns ``(log|h|, log|t|, ok, note)``.
    """
    cols = _columns_by_m(H2, q)
    l_s = math.log(abs(s))
    target = math.log(abs(u1))
    parts_h, parts_l = [], []
    lo = l_s
    while True:
        ell = lo - step * np.arange(1, int(math.ceil(depth / step)) + 1)
        # expected size of h along the asymptote; 0 near the axis root
        lam = np.where(ell < l_s - 1, (target - w[1] * ell) / w[0], 0.0)
        lh = _scaled_x_roots(cols, ell, -1.0, lam)
        parts_h.append(lh)
        parts_l.append(ell)
        if np.isnan(lh).any():
            k = int(np.nonzero(np.isnan(lh))[0][0])
            return np.concatenate(parts_h), np.concatenate(parts_l), False, \
                f"no non-positive real root at log|t|={ell[k]:.4g}"
        lim = w[0] * lh[-1] + w[1] * ell[-1]
        # sign of h^w1 t^w2 with h, t < 0
        sign = (-1) ** ((w[0] + w[1]) % 2)
        if abs(lim - target) < 1e-3 and sign == np.sign(np.real(u1)) and abs(np.imag(u1)) <= 1e-9 * abs(u1):
            break
        lo = ell[-1]
        if l_s - lo >= max_depth:
            return np.concatenate(parts_h), np.concatenate(parts_l), False, \
                f"corner limit exp({lim:.6g}) does not approach {complex(u1):.6g}"
    lh = np.concatenate(parts_h)
    ell = np.concatenate(parts_l)
    bad = _jumps(lh, ell)
    if len(bad):
        return lh, ell, False, f"root-continuation jump near log|t|={ell[bad[0]]:.4g}"
    return lh, ell, True, ""


def _chart_to_original_log(ch, q, lx, sx, ly, sy):
    """Log-absolute values and signs of the original coordinates of chart points."""
    W = ch.inverse_log(q, np.column_stack([lx, ly]))
    (a, b), (c, d) = ch.matrix
    u1, u2 = (m.value(q) for m in ch.multipliers)
    s1 = np.sign(sx) * np.sign(u1)
    s2 = np.sign(sy) * np.sign(u2)
    signs = np.array([s1 ** (d % 2) * s2 ** ((-b) % 2), s1 ** ((-c) % 2) * s2 ** (a % 2)])
    return np.column_stack([W, np.broadcast_to(signs, W.shape)])


def trace_boundary_arcs(H: MirrorPolynomial, q, step: float = 1e-2, corner_depth: float = 40.0) -> ArcCensus:
    """The arcs of the least-norm-root construction, side by side and corner by corner."""
    t = H.triangulation
    qv = H.qvalue(q)
    charts = side_charts(t)
    arcs = []
    n_sides = len(charts)
    for sc in charts:
        Q = sc.points
        k = sc.length
        # restriction roots in the side chart, ordered by magnitude;
        # root r belongs to the segment (Q_r, Q_{r+1})
        seg = [(min(a, b), max(a, b)) for a, b in zip(Q, Q[1:])]
        for r in range(k - 1):
            f = _chart_flag(t, Q[r + 1], Q[r + 2])
            H2, ch = change_flag(H, f)
            coeffs = {}
            for p, c in zip(H2.points, H2.coefficient_values(qv)):
                if p.m == 0:
                    coeffs[p.n] = c
            lo = min(coeffs)
            poly = np.zeros(max(coeffs) - lo + 1)
            for n, c in coeffs.items():
                poly[n - lo] = c
            roots = real_negative_roots(poly)
            roots = roots[roots < 0]
            roots = roots[np.argsort(np.abs(roots))]
            if len(roots) != k:
                arcs.append(Arc("side", (sc.side,), (seg[r], seg[r + 1]), False, 0,
                                f"restriction has {len(roots)} negative roots, expected {k}"))
                continue
            a_, b_ = roots[r], roots[r + 1]
            n = max(8, int(math.ceil(abs(math.log(b_ / a_)) / step)) + 1)
            ys = -np.geomspace(-a_, -b_, n)[1:-1]
            h, ok, note = _trace(H2, qv, ys)
            pts = _chart_to_original_log(ch, qv, np.log(-h), -1, np.log(-ys), -1) if ok else None
            arcs.append(Arc("side", (sc.side,), (seg[r], seg[r + 1]), ok, len(ys), note, pts))

    for k_side, sc in enumerate(charts):
        # corner at the clockwise-first vertex of this side, shared with the next side
        nxt = charts[(k_side + 1) % n_sides]
        Q = sc.points
        V = Q[0]
        H2, ch = change_flag(H, sc.flag)
        ar = axis_restriction(H, qv, sc.side)
        roots = real_negative_roots(ar.coefficients)
        roots = roots[roots < 0]
        next_q = nxt.points[::-1]  # ccw order starting at V
        ends = ((min(Q[0], Q[1]), max(Q[0], Q[1])), (min(next_q[0], next_q[1]), max(next_q[0], next_q[1])))
        if next_q[0] != V:
            raise AssertionError("consecutive sides do not share a vertex")
        if len(roots) == 0:
            arcs.append(Arc("corner", (sc.side, nxt.side), ends, False, 0, "no real axis root"))
            continue
        s = roots[np.argmin(np.abs(roots))]
        far = next_q[-1]
        fm, fn = flag_coordinates(sc.flag, t.points[far])
        e = math.gcd(fm, fn)
        w = (fm // e, fn // e)
        pos = {p: c for p, c in zip(H2.points, H2.coefficient_values(qv))}
        poly = np.array([pos[LatticePoint(l * w[0], l * w[1])] for l in range(e + 1)])
        u = np.roots(poly[::-1])
        u1 = u[np.argmin(np.abs(u))]
        lh, ell, ok, note = _trace_corner(H2, qv, s, w, u1, step, corner_depth)
        pts = _chart_to_original_log(ch, qv, lh, -1, ell, -1) if ok else None
        arcs.append(Arc("corner", (sc.side, nxt.side), ends, ok, len(ell), note, pts))
    return ArcCensus(arcs)


# ---------------------------------------------------------------------------
# cyclic-M


@dataclass
class CyclicMReport:
    components: ComponentReport
    axes: list[AxisEntry]
    arcs: ArcCensus | None
    conditions: dict[str, bool]
    causes: list[str]

    @property
    def is_m_curve(self) -> bool:
        return self.components.is_m_curve

    @property
    def verdict(self) -> bool:
        return all(self.conditions.values())


def _cyclic_order_ok(cycle, t: Triangulation):
    """Side blocks contiguous along the cycle and in polygon order (either way)."""
    bes = boundary_edges(t)
    where = {}
    for k, side in enumerate(t.hull_sides()):
        for a, b in zip(side, side[1:]):
            where[(min(a, b), max(a, b))] = k
    if sorted(cycle) != sorted(bes):
        return False, False
    n = len(bes)
    # canonical ccw order of all axis points
    pos = {e: k for k, e in enumerate(bes)}
    seq = [pos[e] for e in cycle]
    fwd = all((seq[(k + 1) % n] - seq[k]) % n == 1 for k in range(n))
    bwd = all((seq[k] - seq[(k + 1) % n]) % n == 1 for k in range(n))
    sides = [where[e] for e in cycle]
    # contiguity: number of side changes around the cycle equals the number of sides
    changes = sum(sides[k] != sides[(k + 1) % n] for k in range(n))
    n_sides = len(t.hull_sides())
    contiguous = changes == n_sides or n_sides == 1
    return contiguous, (fwd or bwd) and contiguous


def cyclic_m_check(H: MirrorPolynomial, q, grid_res: int = 512) -> CyclicMReport:
    """The M-curve and cyclic conditions, each with its own verdict."""
    t = H.triangulation
    qv = H.qvalue(q)
    comp = count_real_components(H, qv, grid_res)
    axes = [axis_root_localization(H, qv, k) for k in range(len(t.hull_sides()))]
    causes = []
    cond = {}
    cond["M-curve"] = comp.is_m_curve
    if not comp.is_m_curve:
        causes.append(f"{comp.total} components on the real surface, g+1 = {comp.genus + 1}"
                      + (f" ({'; '.join(comp.irregular)})" if comp.irregular else ""))
    cond["one component meets the axes"] = comp.unbounded == 1 and not comp.irregular
    if comp.unbounded != 1:
        causes.append(f"{comp.unbounded} components meet the axes")
    counts_ok = True
    for k, a in enumerate(axes):
        ar = axis_restriction(H, qv, k)
        nr = len([r for r in real_negative_roots(ar.coefficients) if r < 0])
        if nr != a.length:
            counts_ok = False
            causes.append(f"side {k + 1} meets its axis in {nr} points, integer length {a.length}")
    contiguous, ordered = (False, False)
    if comp.unbounded == 1 and comp.cycles:
        contiguous, ordered = _cyclic_order_ok(comp.cycles[0], t)
    cond["axis counts and arcs"] = counts_ok and contiguous
    if counts_ok and not contiguous:
        causes.append("the points on some axis are not consecutive along the unbounded component")
    cond["cyclic order"] = ordered
    if not ordered:
        causes.append("axis crossings along the unbounded component are not in polygon order")
    census = None
    if all(a.ok for a in axes):
        census = trace_boundary_arcs(H, qv)
        cond["traced arcs"] = census.ok
        if not census.ok:
            bad = next(a for a in census.arcs if not a.ok)
            causes.append(f"arc tracer: {bad.note}")
        elif comp.unbounded == 1 and comp.cycles and ordered:
            cyc = comp.cycles[0]
            graph_adj = {frozenset((cyc[k], cyc[(k + 1) % len(cyc)])) for k in range(len(cyc))}
            if not census.adjacency() <= graph_adj:
                cond["traced arcs"] = False
                causes.append("traced arcs join axis points that are not adjacent on the grid census")
    else:
        bad = next(a for a in axes if not a.ok)
        causes.append(f"axis localization on side {bad.side + 1}: {bad.note}")
        cond["axis localization"] = False
    return CyclicMReport(comp, axes, census, cond, causes)


# ---------------------------------------------------------------------------
# two-to-one


@dataclass
class TwoToOneReport:
    interior_samples: int
    boundary_samples: int
    violations: list[dict]
    hypothesis: bool

    @property
    def ok(self) -> bool:
        return not self.violations


def _fiber_crossings(H, q, W, theta):
    """Preimage counts of the points ``W`` (shape ``(k, 2)``) on their torus fibers.

    A preimage is a change of the number of roots ``y`` inside the circle
    ``|y| = e^{w2}`` as ``arg x`` runs around the fiber.
    """
    W = np.atleast_2d(W)
    X = np.exp(W[:, :1] + 1j * theta[None, :]).reshape(-1)
    C, _ = fiber_coefficients(H, q, X, "y")
    R = batch_roots(C).reshape(len(W), len(theta), -1)
    with np.errstate(divide="ignore", invalid="ignore"):
        L = np.log(np.abs(R))
    inside = np.sum(np.where(np.isfinite(L), L < W[:, 1, None, None], False), axis=2)
    return np.sum(inside != np.roll(inside, 1, axis=1), axis=1)


def two_to_one_check(H: MirrorPolynomial, q, n_samples: int = 500, seed: int = 0,
                     fiber_samples: int = 1024, band: float = 0.05, tol: float = 1e-6,
                     components: ComponentReport | None = None, hypothesis: bool | None = None) -> TwoToOneReport:
    """Count fiber preimages at interior amoeba points and real preimages on the boundary.

    Interior samples are drawn uniformly from the spine box and kept when
    they and their four ``band``-neighbours are inside the amoeba.
    """
    qv = H.qvalue(q)
    rng = np.random.default_rng(seed)
    theta = 2 * np.pi * (np.arange(fiber_samples) + 0.5) / fiber_samples
    try:
        T = tropical_polynomial(H, qv)
    except RegimeError:
        T = naive_tropicalization(H, qv)
    curve = tropical_hypersurface(T)
    x0, x1, y0, y1 = curve.bbox(2.0)
    la = H.log_abs_coefficients(qv)
    violations = []
    interior = 0
    offsets = np.array([[0, 0], [band, 0], [-band, 0], [0, band], [0, -band]])
    for _ in range(50 * n_samples // 64 + 50):
        if interior >= n_samples:
            break
        cand = np.column_stack([rng.uniform(x0, x1, 512), rng.uniform(y0, y1, 512)])
        # a term larger than all the others together keeps w off the amoeba
        T_ = la + cand @ H.exponents.T
        top = T_.max(axis=1)
        rest = np.log(np.sum(np.exp(T_ - top[:, None]), axis=1) - 1 + 1e-300) + top
        cand = cand[rest >= top - 2 * band * np.abs(H.exponents).max()][:64]
        if not len(cand):
            continue
        n0 = _fiber_crossings(H, qv, cand, theta)
        cand = cand[n0 > 0]
        if not len(cand):
            continue
        pts = (cand[:, None, :] + offsets[None, :, :]).reshape(-1, 2)
        n = _fiber_crossings(H, qv, pts, theta).reshape(len(cand), len(offsets))
        keep = np.all(n > 0, axis=1)
        for w, k in zip(cand[keep], n[keep, 0]):
            if interior >= n_samples:
                break
            interior += 1
            if k != 2:
                violations.append({"kind": "interior", "w": [float(w[0]), float(w[1])], "preimages": int(k)})

    # boundary: points of the real curve from the grid census
    comp = components if components is not None else count_real_components(H, qv, 256)
    segs = np.concatenate([p.segments.reshape(-1, 2) for p in comp.pieces if len(p.segments)] or [np.zeros((0, 2))])
    quads = np.concatenate([np.tile(p.quadrant, (len(p.segments) * 2, 1)) for p in comp.pieces if len(p.segments)]
                           or [np.zeros((0, 2))])
    nb = min(n_samples, len(segs))
    pick = rng.choice(len(segs), size=nb, replace=False) if nb else []
    grid = 2 * np.pi * np.arange(fiber_samples) / fiber_samples
    for k in pick:
        w = segs[k]
        sx, sy = quads[k]
        # refine onto the real curve along y
        x = sx * math.exp(w[0])
        C, low = fiber_coefficients(H, qv, [x], "y")
        R = batch_roots(C)[0]
        R = R[np.isfinite(R)]
        real = R[np.abs(R.imag) <= 1e-7 * (1 + np.abs(R))].real
        real = real[np.sign(real) == sy]
        if len(real) == 0:
            violations.append({"kind": "boundary", "w": [float(w[0]), float(w[1])], "note": "no real root"})
            continue
        y = real[np.argmin(np.abs(np.log(np.abs(real)) - w[1]))]
        w = np.array([w[0], math.log(abs(y))])
        C, _ = fiber_coefficients(H, qv, np.exp(w[0] + 1j * grid), "y")
        RR = batch_roots(C)
        with np.errstate(divide="ignore", invalid="ignore"):
            gap = np.abs(np.log(np.abs(RR)) - w[1])
        gap = np.where(np.isfinite(gap), gap, np.inf)
        per_theta = gap.min(axis=1)
        near = per_theta < 1e-3
        # a preimage off the real circle would show up as a separate cluster
        real_idx = 0 if sx > 0 else fiber_samples // 2
        clusters = np.nonzero(near & ~np.roll(near, 1))[0]
        kbest = int(np.argmin(np.abs(RR[real_idx] - y)))
        im = abs(RR[real_idx, kbest].imag)
        real_ok = im <= tol * (1 + abs(y))
        if not real_ok or len(clusters) > 1:
            violations.append({"kind": "boundary", "w": [float(w[0]), float(w[1])],
                               "clusters": int(len(clusters)), "imag": float(im)})
    hyp = hypothesis if hypothesis is not None else True
    return TwoToOneReport(interior, int(nb), violations, hyp)


# ---------------------------------------------------------------------------
# pants


class DegenerateSpineError(ValueError):
    pass


@dataclass
class PantsDecomposition:
    pants: int
    tubes: int
    legs: int
    euler: int
    expected_euler: int
    genus: int
    boundary_points: int

    @property
    def ok(self) -> bool:
        return self.euler == self.expected_euler and self.legs == self.boundary_points

    def as_tuple(self):
        return (self.pants, self.tubes, self.legs)


def pants_decomposition(spine: TropicalCurve) -> PantsDecomposition:
    """Pairs of pants from vertices, tubes from bounded edges, legs from rays."""
    for v in range(len(spine.vertices)):
        deg = sum(len(e.directions_from(v)) for e in spine.incident(v))
        if deg != 3:
            raise DegenerateSpineError(f"degenerate spine: vertex {v} has valence {deg}")
    V = len(spine.vertices)
    E = len(spine.bounded_edges)
    R = len(spine.rays) + 2 * len(spine.lines)
    # independent count from the Newton polygon of the slopes
    S = [tuple(int(x) for x in s) for s in spine.polynomial.slopes]
    hull = convex_hull(S)
    if len(hull) >= 3:
        border = sum(math.gcd(b.m - a.m, b.n - a.n) for a, b in zip(hull, hull[1:] + hull[:1]))
        g = sum(1 for p in lattice_points_in_hull(hull) if _strictly_inside(hull, p))
    else:
        a, b = hull[0], hull[-1]
        border = 2 * math.gcd(b.m - a.m, b.n - a.n)
        g = 0
    return PantsDecomposition(V, E, R, -V, 2 - 2 * g - border, g, border)
