"""Amoeba membership, order map, Ronkin function and dominance witnesses.

Points of the plane are log-absolute coordinates ``w = (log|x|, log|y|)``.
Membership samples the torus fiber over ``w1`` and solves for ``y``; degrees
of complement components come from winding integrals with an integer gate.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp

from .lattice import enumerate_flags
from .mirror import MirrorPolynomial, change_flag

DEFAULT_TOL = 0.05
NO_DEGREE = np.iinfo(np.int32).min


class Membership(str, enum.Enum):
    INSIDE = "Inside"
    OUTSIDE = "Outside"
    UNCERTAIN = "Uncertain"


class TooCloseToAmoebaError(ValueError):
    """A winding integral is not within 0.25 of an integer."""


def worker_count(n_tasks: int | None = None) -> int:
    """Workers allowed by ``TROPIMIRROR_THREADS`` (unset or 0 means one per CPU)."""
    raw = os.environ.get("TROPIMIRROR_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"TROPIMIRROR_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError("TROPIMIRROR_THREADS must be >= 0")
    if n == 0:
        n = os.cpu_count() or 1
    if n_tasks is not None:
        n = max(1, min(n, n_tasks))
    return n


# ---------------------------------------------------------------------------
# fiber polynomials


def fiber_coefficients(H: MirrorPolynomial, q, values, solve_for: str = "y"):
    """Coefficients (highest degree first) of ``H`` as a polynomial in one variable.

    ``values`` are the fixed values of the other variable. Returns
    ``(C, low)`` where ``C[k]`` is the coefficient row for ``values[k]`` and the
    fiber polynomial equals ``t^low * sum C[k, j] t^(deg - j)``.
    """
    a = H.coefficient_values(q)
    E = H.exponents
    if solve_for == "y":
        free, fixed = E[:, 1], E[:, 0]
    else:
        free, fixed = E[:, 0], E[:, 1]
    lo, hi = int(free.min()), int(free.max())
    vals = np.atleast_1d(np.asarray(values, dtype=complex))
    C = np.zeros((len(vals), hi - lo + 1), dtype=complex)
    for c, f, g in zip(a, free, fixed):
        C[:, hi - f] += c * vals ** g
    return C, lo


def batch_roots(C: np.ndarray) -> np.ndarray:
    """Roots of each row polynomial; rows with a lower true degree are padded with nan."""
    S, d1 = C.shape
    d = d1 - 1
    out = np.full((S, d), np.nan + 0j)
    if d == 0:
        return out
    scale = np.abs(C).max(axis=1)
    scale[scale == 0] = 1
    lead = np.abs(C[:, 0]) / scale
    good = lead > 1e-13
    if good.any():
        M = C[good, 1:] / C[good, :1]
        comp = np.zeros((M.shape[0], d, d), dtype=complex)
        comp[:, 0, :] = -M
        if d > 1:
            comp[:, np.arange(1, d), np.arange(d - 1)] = 1
        out[good] = np.linalg.eigvals(comp)
    for k in np.nonzero(~good)[0]:
        r = np.roots(C[k])
        out[k, : len(r)] = r
    return out


def _degrees(H: MirrorPolynomial):
    E = H.exponents
    return int(np.ptp(E[:, 0])), int(np.ptp(E[:, 1]))


# ---------------------------------------------------------------------------
# membership


def amoeba_membership(H: MirrorPolynomial, q, w, fiber_samples: int = 256, tol: float = DEFAULT_TOL) -> Membership:
    """Three-state membership of the plane point ``w`` in the amoeba."""
    if fiber_samples < 64:
        raise ValueError("fiber_samples must be at least 64")
    w = np.asarray(w, dtype=float)
    dx, dy = _degrees(H)
    if dx == 0 and dy == 0:
        return Membership.OUTSIDE
    solve_for = "y" if dy > 0 else "x"
    fixed_log, free_log = (w[0], w[1]) if solve_for == "y" else (w[1], w[0])
    theta = 2 * np.pi * np.arange(fiber_samples) / fiber_samples
    try:
        C, _ = fiber_coefficients(H, q, np.exp(fixed_log + 1j * theta), solve_for)
        R = batch_roots(C)
    except np.linalg.LinAlgError:
        return Membership.UNCERTAIN
    with np.errstate(divide="ignore"):
        gaps = np.abs(np.log(np.abs(R)) - free_log)
    gaps = np.where(np.isfinite(gaps), gaps, np.inf)
    g = gaps.min()
    if g < tol:
        return Membership.INSIDE
    if g > 3 * tol:
        return Membership.OUTSIDE
    return Membership.UNCERTAIN


# ---------------------------------------------------------------------------
# order map


@dataclass
class OrderMapResult:
    degree: tuple[int, int]
    residues: tuple[float, float]
    samples: int
    winding_check: tuple[int, int]


def _dlog_terms(H: MirrorPolynomial, q, x, y):
    a = H.coefficient_values(q)
    E = H.exponents
    h = np.zeros(np.broadcast(x, y).shape, dtype=complex)
    hx = np.zeros_like(h)
    hy = np.zeros_like(h)
    for c, (m, n) in zip(a, E):
        t = c * x ** m * y ** n
        h += t
        hx += m * t
        hy += n * t
    return h, hx, hy


def _winding_integral(H, q, w, axis: int, N: int):
    theta = 2 * np.pi * np.arange(N) / N
    if axis == 0:
        x = np.exp(w[0] + 1j * theta)
        y = np.full(N, np.exp(w[1]), dtype=complex)
    else:
        x = np.full(N, np.exp(w[0]), dtype=complex)
        y = np.exp(w[1] + 1j * theta)
    h, hx, hy = _dlog_terms(H, q, x, y)
    num = hx if axis == 0 else hy
    integral = float(np.mean(num / h).real)
    turns = float(np.sum(np.angle(np.roll(h, -1) / h)) / (2 * np.pi))
    return integral, turns


def component_degree(H: MirrorPolynomial, q, w, min_samples: int = 1024, max_samples: int = 2 ** 17) -> OrderMapResult:
    """Degree ``(v1, v2)`` of the complement component containing ``w``.

    Each component is the winding number of ``H`` around one circle of the
    torus fiber, integrated by the trapezoid rule with the sample count
    doubled until two successive values agree to 1e-9. Raises
    :class:`TooCloseToAmoebaError` if a value is 0.25 or more from an integer.
    """
    w = np.asarray(w, dtype=float)
    res, turn = [], []
    for axis in (0, 1):
        N = min_samples
        prev, _ = _winding_integral(H, q, w, axis, N // 2)
        while True:
            cur, tr = _winding_integral(H, q, w, axis, N)
            if abs(cur - prev) < 1e-9 or N >= max_samples:
                break
            prev = cur
            N *= 2
        res.append(cur)
        turn.append(tr)
    deg = tuple(int(round(r)) for r in res)
    for r in res:
        if abs(r - round(r)) >= 0.25:
            raise TooCloseToAmoebaError(f"winding integral {r:.4f} at w=({w[0]:.6g}, {w[1]:.6g}) is not near an integer")
    wind = tuple(int(round(t)) for t in turn)
    if wind != deg:
        raise TooCloseToAmoebaError(f"argument count {wind} disagrees with integral {deg} at w=({w[0]:.6g}, {w[1]:.6g})")
    return OrderMapResult(deg, (res[0], res[1]), N, wind)


def degree_by_root_count(H: MirrorPolynomial, q, w) -> tuple[int, int]:
    """Degree via the argument principle: zeros inside the fiber circles.

    Valid only off the amoeba; much cheaper than the integrals.
    """
    w = np.asarray(w, dtype=float)
    out = []
    for axis, name in ((0, "x"), (1, "y")):
        other = w[1 - axis]
        C, low = fiber_coefficients(H, q, [np.exp(other)], name)
        R = batch_roots(C)[0]
        inside = int(np.sum(np.abs(R[np.isfinite(R)]) < np.exp(w[axis])))
        out.append(low + inside)
    return (out[0], out[1])


# ---------------------------------------------------------------------------
# Ronkin function


@dataclass
class RonkinValue:
    value: float
    error: float
    grid: int


def ronkin_value(H: MirrorPolynomial, q, x, grid: int = 256) -> RonkinValue:
    """Mean of ``log|H|`` over the torus fiber over ``x``.

    The tensor trapezoid rule on ``grid**2`` nodes is compared with its own
    even-index subgrid for the error estimate. Nodes where ``|H| < 1e-13``
    are moved by half a step.
    """
    if grid < 64 or grid & (grid - 1):
        raise ValueError("grid must be a power of two >= 64")
    x = np.asarray(x, dtype=float)
    th = 2 * np.pi * np.arange(grid) / grid
    X = np.exp(x[0] + 1j * th)[:, None]
    Y = np.exp(x[1] + 1j * th)[None, :]
    a = H.coefficient_values(q)
    E = H.exponents
    h = np.zeros((grid, grid), dtype=complex)
    for c, (m, n) in zip(a, E):
        h += c * X ** m * Y ** n
    mag = np.abs(h)
    bad = mag < 1e-13
    if bad.any():
        half = np.pi / grid
        i, j = np.nonzero(bad)
        xs = np.exp(x[0] + 1j * (th[i] + half))
        ys = np.exp(x[1] + 1j * (th[j] + half))
        hb = sum(c * xs ** m * ys ** n for c, (m, n) in zip(a, E))
        mag[i, j] = np.abs(hb)
    L = np.log(mag)
    full = float(L.mean())
    coarse = float(L[::2, ::2].mean())
    return RonkinValue(full, abs(full - coarse), grid)


# ---------------------------------------------------------------------------
# dominance


@dataclass
class DominanceWitness:
    point: np.ndarray
    ratio: float  # sum of the other terms over the dominating one
    source: str


def dominance_ratio(H: MirrorPolynomial, q, i: int, w) -> float:
    la = H.log_abs_coefficients(q)
    E = H.exponents
    vals = la + E @ np.asarray(w, dtype=float)
    others = np.delete(vals, i)
    if len(others) == 0:
        return 0.0
    return float(np.exp(logsumexp(others) - vals[i]))


def dominance_certificate(H: MirrorPolynomial, q, i: int, refine: bool = False):
    """Point ``w`` where term ``i`` beats the sum of all others, or ``None``.

    First tries ``(log 1/3, log 1/3)`` in every flag chart with origin
    ``b_i``; failing that, minimises the convex log-ratio directly. With
    ``refine`` the minimisation always runs, which gives a witness with a
    smaller ratio (faster series convergence).
    """
    q = H.qvalue(q)
    t = H.triangulation
    start = np.log(1 / 3) * np.ones(2)
    best = None
    for f in enumerate_flags(t):
        if f.origin != i:
            continue
        _, ch = change_flag(H, f)
        w = ch.inverse_log(q, start)
        r = dominance_ratio(H, q, i, w)
        if best is None or r < best.ratio:
            best = DominanceWitness(np.asarray(w, dtype=float), r, f"flag {tuple(v + 1 for v in f.indices)}")
    if best is not None and best.ratio < 1 and not refine:
        return best
    la = H.log_abs_coefficients(q)
    E = H.exponents
    others = [j for j in range(len(E)) if j != i]
    if not others:
        return DominanceWitness(np.zeros(2), 0.0, "single term")

    D = E[others] - E[i]
    c = la[others] - la[i]

    def f(w):
        v = c + D @ w
        s = logsumexp(v)
        return s, np.exp(v - s) @ D

    x0 = best.point if best is not None else np.zeros(2)
    span = 50.0 + float(np.abs(la).max())
    res = minimize(f, x0, jac=True, method="L-BFGS-B", bounds=[(-span, span)] * 2)
    if res.fun < 0:
        w = np.asarray(res.x, dtype=float)
        r = dominance_ratio(H, q, i, w)
        if best is not None and best.ratio <= r:
            return best
        return DominanceWitness(w, r, "optimised" if best is None else best.source + ", optimised")
    if best is not None and best.ratio < 1:
        return best
    return None


@dataclass
class SurjectivityEntry:
    index: int
    point: tuple[int, int]
    witness: tuple[float, float] | None
    degree: tuple[int, int] | None
    ok: bool
    note: str = ""


@dataclass
class SurjectivityReport:
    entries: list[SurjectivityEntry]

    @property
    def ok(self) -> bool:
        return all(e.ok for e in self.entries)


def order_map_surjectivity(H: MirrorPolynomial, q) -> SurjectivityReport:
    """Every lattice point is the degree of the component through its witness."""
    out = []
    for i, b in enumerate(H.points):
        wit = dominance_certificate(H, q, i)
        if wit is None:
            out.append(SurjectivityEntry(i, tuple(b), None, None, False, "no dominance witness"))
            continue
        try:
            deg = component_degree(H, q, wit.point).degree
        except TooCloseToAmoebaError as e:
            out.append(SurjectivityEntry(i, tuple(b), tuple(wit.point), None, False, str(e)))
            continue
        ok = deg == tuple(b)
        out.append(SurjectivityEntry(i, tuple(b), tuple(float(v) for v in wit.point), deg, ok,
                                     "" if ok else f"degree {deg} != {tuple(b)}"))
    return SurjectivityReport(out)


# ---------------------------------------------------------------------------
# raster


INSIDE, OUTSIDE, UNCERTAIN = 0, 1, 2


@dataclass
class AmoebaRaster:
    """Classification of cell centres; row 0 is the lowest ``w2``."""

    bbox: tuple[float, float, float, float]
    labels: np.ndarray  # (ny, nx) of INSIDE / OUTSIDE / UNCERTAIN
    degrees: np.ndarray  # (ny, nx, 2); NO_DEGREE off the complement
    w1: np.ndarray
    w2: np.ndarray

    @property
    def shape(self):
        return self.labels.shape

    def degree_classes(self) -> list[tuple[int, int]]:
        d = self.degrees[self.labels == OUTSIDE]
        return sorted({(int(a), int(b)) for a, b in d})

    def counts(self) -> dict[str, int]:
        return {
            "inside": int((self.labels == INSIDE).sum()),
            "outside": int((self.labels == OUTSIDE).sum()),
            "uncertain": int((self.labels == UNCERTAIN).sum()),
        }


def _raster_column(H, q, w1, w2s, theta, tol):
    """Labels and ``v2`` for one column of constant ``w1``."""
    dx, dy = _degrees(H)
    ny = len(w2s)
    labels = np.full(ny, UNCERTAIN, dtype=np.uint8)
    v2 = np.zeros(ny, dtype=np.int64)
    if dy == 0:
        return None
    C, low = fiber_coefficients(H, q, np.exp(w1 + 1j * theta), "y")
    try:
        R = batch_roots(C)
    except np.linalg.LinAlgError:
        return labels, v2
    with np.errstate(divide="ignore"):
        L = np.log(np.abs(R))
    real_fiber = L[0][np.isfinite(L[0])]
    L = np.sort(L[np.isfinite(L)])
    if len(L):
        pos = np.searchsorted(L, w2s)
        left = np.abs(w2s - L[np.clip(pos - 1, 0, len(L) - 1)])
        right = np.abs(L[np.clip(pos, 0, len(L) - 1)] - w2s)
        gap = np.minimum(left, right)
    else:
        gap = np.full(ny, np.inf)
    labels[gap < tol] = INSIDE
    labels[gap > 3 * tol] = OUTSIDE
    v2 = low + (real_fiber[None, :] < w2s[:, None]).sum(axis=1)
    return labels, v2


def raster_amoeba(H: MirrorPolynomial, q, bbox, res, fiber_samples: int = 256,
                  tol: float = DEFAULT_TOL, workers: int | None = None) -> AmoebaRaster:
    """Classify the centres of a ``res`` grid over ``bbox = (x0, x1, y0, y1)``.

    Roots of the ``y``-fibers depend only on the column, so each column is
    solved once; columns are distributed over threads and the result does not
    depend on how they are split.
    """
    nx, ny = (res, res) if np.ndim(res) == 0 else (int(res[0]), int(res[1]))
    if max(nx, ny) > 4096 or min(nx, ny) < 1:
        raise ValueError("resolution must be between 1 and 4096")
    if fiber_samples < 64:
        raise ValueError("fiber_samples must be at least 64")
    x0, x1, y0, y1 = (float(v) for v in bbox)
    if not (x1 > x0 and y1 > y0):
        raise ValueError("bbox must satisfy x0 < x1 and y0 < y1")
    q = H.qvalue(q)
    w1 = x0 + (np.arange(nx) + 0.5) * (x1 - x0) / nx
    w2 = y0 + (np.arange(ny) + 0.5) * (y1 - y0) / ny
    theta = 2 * np.pi * np.arange(fiber_samples) / fiber_samples
    labels = np.full((ny, nx), OUTSIDE, dtype=np.uint8)
    degrees = np.full((ny, nx, 2), NO_DEGREE, dtype=np.int64)
    dx, dy = _degrees(H)
    if dx == 0 and dy == 0:
        degrees[:] = np.array(H.points[0])
        return AmoebaRaster((x0, x1, y0, y1), labels, degrees, w1, w2)
    if dy == 0:
        # transpose the problem: solve for x along rows
        from .lattice import Triangulation
        from .mirror import MirrorPolynomial as MP

        t = H.triangulation
        swapped = MP(Triangulation(tuple((p.n, p.m) for p in t.points), t.triangles), H.coefficients)
        r = raster_amoeba(swapped, q, (y0, y1, x0, x1), (ny, nx), fiber_samples, tol, workers)
        return AmoebaRaster((x0, x1, y0, y1), r.labels.T.copy(), r.degrees.transpose(1, 0, 2)[..., ::-1].copy(), w1, w2)

    n_workers = workers if workers is not None else worker_count(nx)

    def col(k):
        return _raster_column(H, q, w1[k], w2, theta, tol)

    if n_workers > 1:
        with ThreadPoolExecutor(n_workers) as ex:
            cols = list(ex.map(col, range(nx)))
    else:
        cols = [col(k) for k in range(nx)]
    v2 = np.zeros((ny, nx), dtype=np.int64)
    for k, (lab, d2) in enumerate(cols):
        labels[:, k] = lab
        v2[:, k] = d2
    # v1 from x-roots along each row (real point of the fiber)
    C, low = fiber_coefficients(H, q, np.exp(w2), "x")
    R = batch_roots(C)
    with np.errstate(divide="ignore"):
        Lx = np.log(np.abs(R))
    Lx = np.where(np.isfinite(Lx), Lx, np.inf)
    v1 = low + (Lx[:, None, :] < w1[None, :, None]).sum(axis=2)
    out = labels == OUTSIDE
    degrees[..., 0] = np.where(out, v1, NO_DEGREE)
    degrees[..., 1] = np.where(out, v2, NO_DEGREE)
    return AmoebaRaster((x0, x1, y0, y1), labels, degrees, w1, w2)
