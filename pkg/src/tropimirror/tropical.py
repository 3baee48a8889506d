"""Tropical spine of a mirror curve.

The spine is the corner locus of ``max_i (gamma_i + m_i w1 + n_i w2)``, where
``gamma_i`` are the constant terms of the Ronkin function on the complement
components of the amoeba. They are computed from the logarithmic series
around each dominating term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .lattice import (
    Cell,
    DualityWitness,
    Subdivision,
    Triangulation,
    check_dual_subdivision,
    primitive,
)
from .mirror import MirrorPolynomial, RegimeError

K_MAX_CAP = 60
MERGE_TOL = 1e-9


@dataclass(frozen=True)
class AffineTerm:
    gamma: float
    m: int
    n: int


@dataclass(frozen=True)
class TropicalPolynomial:
    terms: tuple[AffineTerm, ...]

    def __post_init__(self):
        slopes = [(t.m, t.n) for t in self.terms]
        if len(set(slopes)) != len(slopes):
            raise ValueError("tropical polynomial terms must have distinct slopes")

    @classmethod
    def from_arrays(cls, gammas, slopes) -> "TropicalPolynomial":
        return cls(tuple(AffineTerm(float(g), int(s[0]), int(s[1])) for g, s in zip(gammas, slopes)))

    @property
    def gammas(self) -> np.ndarray:
        return np.array([t.gamma for t in self.terms])

    @property
    def slopes(self) -> np.ndarray:
        return np.array([(t.m, t.n) for t in self.terms], dtype=int).reshape(-1, 2)

    def values(self, w) -> np.ndarray:
        """All affine terms at points ``w`` (shape ``(..., 2)``); last axis is the term."""
        w = np.asarray(w, dtype=float)
        return self.gammas + w[..., :1] * self.slopes[:, 0] + w[..., 1:2] * self.slopes[:, 1]

    def __call__(self, w):
        return self.values(w).max(axis=-1)

    def argmax(self, w):
        return self.values(w).argmax(axis=-1)


# ---------------------------------------------------------------------------
# spine coefficients


@dataclass
class SpineCoefficients:
    gammas: np.ndarray
    log_abs: np.ndarray
    k_max: list[int]
    tail_bounds: list[float]
    witnesses: list[np.ndarray]
    ratios: list[float]

    @property
    def corrections(self) -> np.ndarray:
        return self.gammas - self.log_abs


def _k_max_for(tol: float, rho: float) -> tuple[int, float]:
    """Smallest ``k`` with the geometric tail bound below ``tol``.

    The bound ``4 (3/4)^k`` holds whenever the dominance ratio is below
    3/4; a smaller measured ratio gives the tighter ``rho^k / (1 - rho)``.
    """
    best = None
    candidates = []
    if rho <= 0.75:
        candidates.append((0.75, 4.0))
    if rho > 0:
        candidates.append((rho, 1.0 / (1.0 - rho)))
    for r, c in candidates:
        k = 1
        while c * r ** k >= tol and k <= K_MAX_CAP:
            k += 1
        if best is None or k < best[0]:
            best = (k, c * r ** k)
    if rho == 0:
        return 0, 0.0
    return best


def log_series(offsets: Sequence[Sequence[int]], ratios: Sequence[float], k_max: int) -> float:
    """``sum_{k=1}^{k_max} (-1)^{k-1}/k [g^k]_0`` for ``g = sum r_j z^{d_j}``.

    ``[g^k]_0`` is the constant term, i.e. the sum over ordered ``k``-tuples
    of offsets adding up to zero of the product of their ratios. Powers of
    ``g`` are built by repeated shift-and-add on a dense exponent grid, which
    visits every ordered tuple once without enumerating them.
    """
    d = np.asarray(offsets, dtype=int).reshape(-1, 2)
    r = np.asarray(ratios, dtype=float)
    if len(d) == 0 or k_max == 0:
        return 0.0
    lo = d.min(axis=0)
    span = d.max(axis=0) - lo
    arr = np.ones((1, 1))  # g^k, indexed by exponent - k*lo
    total = 0.0
    for k in range(1, k_max + 1):
        new = np.zeros(tuple(span * k + 1))
        for dj, rj in zip(d, r):
            o = dj - lo
            new[o[0]:o[0] + arr.shape[0], o[1]:o[1] + arr.shape[1]] += rj * arr
        arr = new
        idx = -k * lo
        if np.all(idx >= 0) and np.all(idx < arr.shape):
            total += (-1) ** (k - 1) * arr[idx[0], idx[1]] / k
    return float(total)


def spine_coefficients(H: MirrorPolynomial, q, tol: float = 1e-6) -> SpineCoefficients:
    """Constant terms ``gamma_i`` of the Ronkin function, one per lattice point.

    Requires a dominance witness for every term; raises :class:`RegimeError`
    otherwise. The series is evaluated with coefficients rescaled to the
    witness point, so every ratio is below the dominance margin and no
    intermediate entry overflows.
    """
    from .amoeba import dominance_certificate

    q = H.qvalue(q)
    la = H.log_abs_coefficients(q)
    s = H.signs().astype(float)
    B = H.exponents
    gammas, kms, tails, wits, rhos = [], [], [], [], []
    for i in range(len(B)):
        wit = dominance_certificate(H, q, i, refine=True)
        if wit is None:
            b = tuple(int(v) for v in B[i])
            raise RegimeError(f"not in large-radius regime: no dominance witness for b{i + 1}={b}")
        w = wit.point
        others = [j for j in range(len(B)) if j != i]
        d = B[others] - B[i]
        # |c_j / c_i| z^{d_j} evaluated on the torus fiber through the witness
        logs = la[others] - la[i] + d @ w
        ratios = s[others] * s[i] * np.exp(logs)
        rho = float(np.exp(logs).sum())
        km, tail = _k_max_for(tol, rho)
        if tail >= tol:
            raise RegimeError(f"series for b{i + 1} does not reach tol={tol:g} within {K_MAX_CAP} terms")
        gammas.append(la[i] + log_series(d, ratios, km))
        kms.append(km)
        tails.append(tail)
        wits.append(w)
        rhos.append(rho)
    return SpineCoefficients(np.array(gammas), la, kms, tails, wits, rhos)


def tropical_polynomial(H: MirrorPolynomial, q, tol: float = 1e-6) -> TropicalPolynomial:
    sc = spine_coefficients(H, q, tol)
    return TropicalPolynomial.from_arrays(sc.gammas, H.exponents)


def naive_tropicalization(H: MirrorPolynomial, q) -> TropicalPolynomial:
    """``max(log|a_i| + <b_i, w>)`` without the series correction."""
    return TropicalPolynomial.from_arrays(H.log_abs_coefficients(q), H.exponents)


# ---------------------------------------------------------------------------
# corner locus


@dataclass
class Vertex:
    point: np.ndarray
    terms: frozenset


@dataclass
class Edge:
    """A tie between ``terms``; ``end`` is ``None`` for a ray, both ``None`` for a line."""

    terms: tuple[int, int]
    direction: tuple[int, int]  # primitive, from start towards end
    start: int | None
    end: int | None
    anchor: np.ndarray  # a point on the cell

    @property
    def kind(self) -> str:
        if self.start is not None and self.end is not None:
            return "edge"
        if self.start is None and self.end is None:
            return "line"
        return "ray"

    def directions_from(self, v: int) -> list[tuple[int, int]]:
        """Directions leaving vertex ``v`` along this cell."""
        d = self.direction
        out = []
        if self.start == v:
            out.append(d)
        if self.end == v:
            out.append((-d[0], -d[1]))
        return out


@dataclass
class TropicalCurve:
    polynomial: TropicalPolynomial
    vertices: list[Vertex]
    edges: list[Edge]  # bounded edges, rays and lines

    @property
    def bounded_edges(self) -> list[Edge]:
        return [e for e in self.edges if e.kind == "edge"]

    @property
    def rays(self) -> list[Edge]:
        return [e for e in self.edges if e.kind == "ray"]

    @property
    def lines(self) -> list[Edge]:
        return [e for e in self.edges if e.kind == "line"]

    def regions(self) -> list[int]:
        """Terms that dominate on a full-dimensional region."""
        ts = set()
        for e in self.edges:
            ts.update(e.terms)
        if not ts:
            ts = {int(np.argmax(self.polynomial.gammas))}
        return sorted(ts)

    def bbox(self, pad: float = 0.0) -> tuple[float, float, float, float]:
        if self.vertices:
            P = np.array([v.point for v in self.vertices])
        elif self.edges:
            P = np.array([e.anchor for e in self.edges])
        else:
            P = np.zeros((1, 2))
        return (P[:, 0].min() - pad, P[:, 0].max() + pad, P[:, 1].min() - pad, P[:, 1].max() + pad)

    def incident(self, v: int) -> list[Edge]:
        return [e for e in self.edges if v in (e.start, e.end)]


def tropical_hypersurface(T: TropicalPolynomial, merge_tol: float = MERGE_TOL) -> TropicalCurve:
    """Corner locus of ``T``: every segment, ray or line where two terms tie for the max."""
    g = T.gammas
    S = T.slopes
    n = len(g)
    if n < 2:
        raise ValueError("need at least two terms")
    scale = 1.0 + float(np.abs(g).max())
    tol = merge_tol * scale
    vertices: list[Vertex] = []

    def vertex_id(p) -> int:
        for k, v in enumerate(vertices):
            if np.max(np.abs(v.point - p)) <= merge_tol * (1 + np.max(np.abs(p))) * 10:
                return k
        vals = g + S @ p
        top = vals.max()
        terms = frozenset(int(j) for j in np.nonzero(vals >= top - 1e-7 * scale)[0])
        vertices.append(Vertex(np.array(p, dtype=float), terms))
        return len(vertices) - 1

    pieces = []
    for i in range(n):
        for j in range(i + 1, n):
            diff = S[i] - S[j]
            dd = float(diff @ diff)
            p0 = diff * (g[j] - g[i]) / dd
            d = np.array(primitive((-diff[1], diff[0])), dtype=float)
            lo, hi = -math.inf, math.inf
            empty = False
            for k in range(n):
                if k in (i, j):
                    continue
                bk = S[k] - S[i]
                alpha = g[k] - g[i] + float(bk @ p0)
                beta = float(bk @ d)
                if beta == 0:
                    if alpha > -tol:
                        empty = True
                        break
                elif beta > 0:
                    hi = min(hi, -alpha / beta)
                else:
                    lo = max(lo, -alpha / beta)
            if empty or hi - lo <= merge_tol:
                continue
            pieces.append((i, j, p0, d, lo, hi))

    edges = []
    for i, j, p0, d, lo, hi in pieces:
        start = vertex_id(p0 + lo * d) if math.isfinite(lo) else None
        end = vertex_id(p0 + hi * d) if math.isfinite(hi) else None
        if start is None and end is not None:
            # store rays as leaving their vertex
            start, end = end, None
            direction = (-int(d[0]), -int(d[1]))
        else:
            direction = (int(d[0]), int(d[1]))
        if math.isfinite(lo) and math.isfinite(hi):
            anchor = p0 + 0.5 * (lo + hi) * d
        elif math.isfinite(lo):
            anchor = p0 + lo * d
        elif math.isfinite(hi):
            anchor = p0 + hi * d
        else:
            anchor = p0
        edges.append(Edge((i, j), direction, start, end, anchor))
    return TropicalCurve(T, vertices, edges)


def balancing_check(c: TropicalCurve) -> bool:
    """Weighted primitive directions sum to zero at every vertex."""
    S = c.polynomial.slopes
    for v in range(len(c.vertices)):
        total = np.zeros(2, dtype=int)
        for e in c.incident(v):
            i, j = e.terms
            w = math.gcd(*(int(x) for x in S[i] - S[j]))
            for d in e.directions_from(v):
                total += w * np.array(d)
        if total.any():
            return False
    return True


def subdivision_of(c: TropicalCurve) -> Subdivision:
    """Cells: vertices, then edges/rays/lines, then one region per dominating term."""
    S = c.polynomial.slopes
    cells = [Cell(0, frozenset(), ("vertex", k)) for k in range(len(c.vertices))]
    nv = len(cells)
    for k, e in enumerate(c.edges):
        faces = frozenset(v for v in (e.start, e.end) if v is not None)
        cells.append(Cell(1, faces, ("edge", tuple(sorted(e.terms)))))
    region_ids = {}
    for i in c.regions():
        faces = set()
        for k, e in enumerate(c.edges):
            if i in e.terms:
                faces.add(nv + k)
                faces.update(v for v in (e.start, e.end) if v is not None)
        region_ids[i] = len(cells)
        cells.append(Cell(2, frozenset(faces), ("region", i)))

    cones: dict = {}
    full = [(1, 0), (-1, 0), (0, 1), (0, -1)]
    for k in range(nv):
        cones[(k, k)] = []
    for k, e in enumerate(c.edges):
        s = nv + k
        d = e.direction
        cones[(s, s)] = [d, (-d[0], -d[1])]
        for v in (e.start, e.end):
            if v is not None:
                cones[(v, s)] = e.directions_from(v)
    for i, r in region_ids.items():
        cones[(r, r)] = list(full)
        for k, e in enumerate(c.edges):
            if i not in e.terms:
                continue
            j = e.terms[0] if e.terms[1] == i else e.terms[1]
            d = e.direction
            out = (int(S[i][0] - S[j][0]), int(S[i][1] - S[j][1]))
            cones[(nv + k, r)] = [d, (-d[0], -d[1]), out]
        for v in range(nv):
            if v not in cells[r].faces:
                continue
            gens = []
            for e in c.incident(v):
                if i in e.terms:
                    gens += e.directions_from(v)
            cones[(v, r)] = gens
    return Subdivision(cells, cones)


@dataclass
class DualityCertificate:
    ok: bool
    n_one_cells: int
    missing_edges: list[tuple[int, int]] = field(default_factory=list)
    extra_edges: list[tuple[int, int]] = field(default_factory=list)
    witness: DualityWitness | None = None
    message: str = ""
    curve: TropicalCurve | None = None
    correspondence: list[int] | None = None

    @property
    def verdict(self) -> str:
        return "PASS" if self.ok else "FAIL"


def duality_correspondence(curve: TropicalCurve, t: Triangulation):
    """Spine subdivision, triangulation subdivision and the candidate bijection.

    Returns ``(s, u, corr, missing, extra, problems)`` where ``corr`` is
    ``None`` whenever the natural matching (term to point, tie edge to
    triangulation edge, vertex to triangle) is not a bijection.
    """
    s = subdivision_of(curve)
    u = Subdivision.from_triangulation(t)
    labels_u = {c.label: k for k, c in enumerate(u.cells)}
    tri_edges = set(t.edges())
    spine_edges = [tuple(sorted(e.terms)) for e in curve.edges]
    missing = sorted(tri_edges - set(spine_edges))
    extra = sorted(set(spine_edges) - tri_edges)
    problems = []
    if len(set(spine_edges)) != len(spine_edges):
        problems.append("a pair of terms ties along more than one piece")
    corr = []
    for cell in s.cells:
        kind, val = cell.label
        if kind == "region":
            target = ("point", val)
        elif kind == "edge":
            target = ("edge", val)
        else:
            terms = curve.vertices[val].terms
            target = ("triangle", tuple(sorted(terms))) if len(terms) == 3 else None
            if target is None:
                problems.append(f"vertex {val} ties {len(terms)} terms")
        if target is None or target not in labels_u:
            corr.append(None)
        else:
            corr.append(labels_u[target])
    if None in corr or sorted(corr) != list(range(len(u.cells))):
        return s, u, None, missing, extra, problems
    return s, u, corr, missing, extra, problems


def dual_check(H: MirrorPolynomial, q, tol: float = 1e-6) -> DualityCertificate:
    """Check that the spine's subdivision is dual to the triangulation of ``H``."""
    T = tropical_polynomial(H, q, tol)
    curve = tropical_hypersurface(T)
    t = H.triangulation
    s, u, corr, missing, extra, problems = duality_correspondence(curve, t)
    n1 = len(curve.edges)
    if corr is None:
        msg = "; ".join(
            [f"missing dual of edge b{i + 1}b{j + 1}" for i, j in missing]
            + [f"extra spine edge for b{i + 1}b{j + 1}" for i, j in extra]
            + problems
        ) or "cells do not correspond"
        return DualityCertificate(False, n1, missing, extra, None, msg, curve, None)
    errs = s.check()
    if errs:
        return DualityCertificate(False, n1, missing, extra, None, errs[0], curve, corr)
    w = check_dual_subdivision(s, u, corr)
    msg = "" if w.ok else f"{w.reason} condition fails for cells {w.pair}"
    return DualityCertificate(w.ok, n1, missing, extra, w, msg, curve, corr)
