"""The mirror-curve Laurent polynomial and its flag coordinate changes.

Coefficients are signed monomials in parameters ``q_1..q_p`` and stay
symbolic (:class:`QMonomial`). Numerics only happen once a :class:`QValue`
is supplied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .lattice import (
    BASE_POINTS,
    Flag,
    LatticePoint,
    Triangulation,
    barycentric,
    base_flag,
    enumerate_flags,
    flag_coordinates,
    from_flag_coordinates,
    validate_triangulation,
)


class DomainError(ValueError):
    """Evaluation requested at a point with a zero coordinate."""


class PreconditionError(ValueError):
    pass


class RatioPropertyError(ValueError):
    """A coefficient ratio that should be a non-constant monomial is not."""


class RegimeError(RuntimeError):
    """The parameters are not close enough to the large radius limit."""


class NonRegularTriangulationError(ValueError):
    """No height function induces the triangulation.

    ``witness`` lists ``(triangle_index, point_index, weight)`` triples whose
    weighted sum of lifting inequalities is contradictory.
    """

    def __init__(self, message, witness):
        super().__init__(message)
        self.witness = witness


def sign_rule(b) -> int:
    """-1 when both coordinates are odd, +1 otherwise."""
    return -1 if (b[0] % 2 and b[1] % 2) else 1


@dataclass(frozen=True)
class QMonomial:
    """``sign * prod(q_j ** exponents[j])`` with rational exponents.

    Negative exponents are allowed for intermediate ratios; the mirror
    polynomial built from a triangulation only ever carries non-negative ones.
    """

    sign: int
    exponents: tuple[Fraction, ...]

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        object.__setattr__(self, "exponents", tuple(Fraction(e) for e in self.exponents))

    @classmethod
    def one(cls, p: int) -> "QMonomial":
        return cls(1, (Fraction(0),) * p)

    @property
    def p(self) -> int:
        return len(self.exponents)

    @property
    def is_constant(self) -> bool:
        return all(e == 0 for e in self.exponents)

    def __mul__(self, other: "QMonomial") -> "QMonomial":
        return QMonomial(self.sign * other.sign, tuple(a + b for a, b in zip(self.exponents, other.exponents)))

    def __truediv__(self, other: "QMonomial") -> "QMonomial":
        return QMonomial(self.sign * other.sign, tuple(a - b for a, b in zip(self.exponents, other.exponents)))

    def __pow__(self, k: int) -> "QMonomial":
        k = int(k)
        return QMonomial(self.sign ** (k % 2) if k % 2 else 1, tuple(e * k for e in self.exponents))

    def log_abs(self, q: "QValue") -> float:
        return float(sum(float(e) * lq for e, lq in zip(self.exponents, q.log_values)))

    def value(self, q: "QValue") -> float:
        return self.sign * math.exp(self.log_abs(q))

    def __str__(self):
        parts = []
        for j, e in enumerate(self.exponents):
            if e == 0:
                continue
            parts.append(f"q{j + 1}" + ("" if e == 1 else f"^{e}"))
        body = "*".join(parts) or "1"
        return ("-" if self.sign < 0 else "") + body


@dataclass(frozen=True)
class QValue:
    """Positive numeric values of the parameters."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if any(not v > 0 or not math.isfinite(v) for v in vals):
            raise ValueError(f"parameter values must be positive and finite, got {vals}")
        object.__setattr__(self, "values", vals)

    @property
    def log_values(self) -> tuple[float, ...]:
        return tuple(math.log(v) for v in self.values)


def as_qvalue(q, p: int) -> QValue:
    """Accept a :class:`QValue`, a scalar (repeated ``p`` times) or a sequence."""
    if isinstance(q, QValue):
        vals = q.values
    elif np.ndim(q) == 0:
        vals = (float(q),) * p
    else:
        vals = tuple(float(v) for v in q)
    if len(vals) != p:
        raise ValueError(f"expected {p} parameter values, got {len(vals)}")
    return QValue(vals)


@dataclass(frozen=True)
class MirrorPolynomial:
    """Laurent polynomial ``sum_i a_i(q) x^{m_i} y^{n_i}`` on a triangulation.

    ``coefficients[i]`` belongs to ``triangulation.points[i]``; evaluation
    sums terms in that index order.
    """

    triangulation: Triangulation
    coefficients: tuple[QMonomial, ...]

    def __post_init__(self):
        if len(self.coefficients) != self.triangulation.n_points:
            raise ValueError("one coefficient per lattice point required")
        ps = {c.p for c in self.coefficients}
        if len(ps) > 1:
            raise ValueError("coefficients disagree on the number of parameters")

    @property
    def p(self) -> int:
        return self.coefficients[0].p

    @property
    def points(self) -> tuple[LatticePoint, ...]:
        return self.triangulation.points

    @property
    def exponents(self) -> np.ndarray:
        return np.array(self.points, dtype=int).reshape(-1, 2)

    def qvalue(self, q) -> QValue:
        return as_qvalue(q, self.p)

    def coefficient_values(self, q) -> np.ndarray:
        q = self.qvalue(q)
        return np.array([c.value(q) for c in self.coefficients])

    def log_abs_coefficients(self, q) -> np.ndarray:
        q = self.qvalue(q)
        return np.array([c.log_abs(q) for c in self.coefficients])

    def signs(self) -> np.ndarray:
        return np.array([c.sign for c in self.coefficients])

    def follows_sign_rule(self) -> bool:
        return all(c.sign == sign_rule(b) for c, b in zip(self.coefficients, self.points))

    def __str__(self):
        out = []
        for c, b in zip(self.coefficients, self.points):
            mono = "".join(
                s for s in (
                    "" if b.m == 0 else ("x" if b.m == 1 else f"x^{b.m}"),
                    "" if b.n == 0 else ("y" if b.n == 1 else f"y^{b.n}"),
                )
            ) or "1"
            coef = str(c)
            if coef == "1":
                out.append(f"+ {mono}")
            elif coef == "-1":
                out.append(f"- {mono}")
            elif coef.startswith("-"):
                out.append(f"- {coef[1:]}*{mono}")
            else:
                out.append(f"+ {coef}*{mono}")
        s = " ".join(out)
        return s[2:] if s.startswith("+ ") else s


def evaluate(H: MirrorPolynomial, q, x, y):
    """Value of ``H`` at complex ``x, y`` (scalars or broadcastable arrays)."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if np.any(x == 0) or np.any(y == 0):
        raise DomainError("H is only defined on the torus: x and y must be non-zero")
    a = H.coefficient_values(q)
    total = np.zeros(np.broadcast(x, y).shape, dtype=complex)
    for c, b in zip(a, H.points):
        total = total + c * x ** b.m * y ** b.n
    return total[()] if total.ndim == 0 else total


# ---------------------------------------------------------------------------
# heights


def _lifting_rows(t: Triangulation):
    """Rows ``(coeffs, triangle, point)`` of the strict lifting inequalities."""
    rows = []
    for k, tri in enumerate(t.triangles):
        for l in range(t.n_points):
            if l in tri:
                continue
            lam = barycentric(t, tri, t.points[l])
            coeff = [Fraction(0)] * t.n_points
            coeff[l] += 1
            for v, w in zip(tri, lam):
                coeff[v] -= w
            rows.append((coeff, k, l))
    return rows


def is_height_certificate(t: Triangulation, h: Sequence) -> bool:
    """Exact check that lifting by ``h`` induces exactly the triangles of ``t``."""
    h = [Fraction(v) for v in h]
    return all(sum(c * v for c, v in zip(row, h)) > 0 for row, _, _ in _lifting_rows(t))


def assign_heights(t: Triangulation) -> tuple[int, ...]:
    """Integer heights, zero on the base triangle, certifying ``t`` as regular.

    A linear program minimising the total height subject to a margin of one
    in every lifting inequality is solved in floating point, then rounded to
    rationals and checked exactly. Non-regular input raises
    :class:`NonRegularTriangulationError` with a Farkas witness.
    """
    from scipy.optimize import linprog

    n = t.n_points
    free = list(range(3, n))
    if not free:
        return (0,) * n
    rows = _lifting_rows(t)
    A = np.array([[float(r[0][j]) for j in free] for r in rows])
    res = linprog(
        c=np.ones(len(free)),
        A_ub=-A,
        b_ub=-np.ones(len(rows)),
        bounds=[(0, None)] * len(free),
        method="highs",
    )
    if res.status == 0:
        for den in (1, 2, 3, 4, 6, 12, 60, 840, 10**6):
            h = [Fraction(0)] * 3 + [Fraction(v).limit_denominator(den) for v in res.x]
            if is_height_certificate(t, h):
                lcm = math.lcm(*(v.denominator for v in h))
                ints = [int(v * lcm) for v in h]
                g = math.gcd(*ints[3:]) or 1
                return tuple(v // g for v in ints)
    # Farkas: y >= 0, sum y = 1, A^T y <= 0 proves that A h >= 1 has no solution
    # with h >= 0 (any h would give 0 >= y^T A h >= 1).
    far = linprog(
        c=np.zeros(len(rows)),
        A_ub=A.T,
        b_ub=np.zeros(len(free)),
        A_eq=np.ones((1, len(rows))),
        b_eq=[1.0],
        bounds=[(0, None)] * len(rows),
        method="highs",
    )
    witness = []
    if far.status == 0:
        witness = [(rows[k][1], rows[k][2], float(w)) for k, w in enumerate(far.x) if w > 1e-12]
    raise NonRegularTriangulationError("triangulation is not induced by any height function", witness)


def build_mirror_polynomial(
    t: Triangulation,
    mode: str = "auto-heights",
    exponents=None,
    signs: Sequence[int] | None = None,
) -> MirrorPolynomial:
    """Mirror polynomial of a valid triangulation.

    ``mode="auto-heights"`` uses one parameter with exponents from
    :func:`assign_heights`. ``mode="explicit"`` takes a ``p x p`` matrix of
    non-negative integers whose row ``r`` gives the exponents of ``a_{r+4}``.
    ``signs`` overrides the parity sign rule (used to build curves that break
    it on purpose); the base terms must stay positive.
    """
    rep = validate_triangulation(t)
    if not rep.ok:
        raise ValueError(f"invalid triangulation:\n{rep}")
    n = t.n_points
    p_extra = n - 3
    if mode in ("auto", "auto-heights"):
        h = assign_heights(t)
        exps = [(Fraction(h[i]),) for i in range(n)] if p_extra else [() for _ in range(n)]
        if p_extra == 0:
            exps = [()] * n
    elif mode == "explicit":
        mat = [] if exponents is None else [list(r) for r in exponents]
        if len(mat) != p_extra or any(len(r) != p_extra for r in mat):
            raise ValueError(f"explicit mode needs a {p_extra}x{p_extra} exponent matrix")
        for r, row in enumerate(mat):
            for v in row:
                if Fraction(v) != int(Fraction(v)) or v < 0:
                    raise ValueError(f"exponent matrix entries must be non-negative integers (row {r + 1})")
            if all(v == 0 for v in row):
                raise ValueError(f"coefficient of b{r + 4} would be constant (all-zero exponent row)")
        exps = [(Fraction(0),) * p_extra] * 3 + [tuple(Fraction(v) for v in row) for row in mat]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if signs is None:
        sg = [sign_rule(b) for b in t.points]
    else:
        sg = [int(s) for s in signs]
        if len(sg) != n or any(s not in (1, -1) for s in sg):
            raise ValueError("signs must list +1/-1 for every point")
        if sg[:3] != [1, 1, 1]:
            raise ValueError("the coefficients of 1, x, y must be +1")
    return MirrorPolynomial(t, tuple(QMonomial(s, e) for s, e in zip(sg, exps)))


def polynomial_from_terms(points, triangles, coefficients: Sequence[float]) -> tuple[MirrorPolynomial, QValue]:
    """Build a polynomial with given numeric coefficients on a triangulation.

    Each non-base coefficient becomes its own parameter ``q_j = |c|`` so the
    pair ``(H, q)`` evaluates to exactly the requested numbers.
    """
    t = Triangulation(points, triangles)
    n = t.n_points
    if len(coefficients) != n:
        raise ValueError("one coefficient per point")
    if any(float(c) != 1.0 for c in coefficients[:3]):
        raise ValueError("the coefficients of 1, x, y must be 1")
    p = n - 3
    coeffs = []
    for i, c in enumerate(coefficients):
        e = [Fraction(0)] * p
        if i >= 3:
            e[i - 3] = Fraction(1)
        coeffs.append(QMonomial(1 if float(c) > 0 else -1, tuple(e)))
    q = QValue(tuple(abs(float(c)) for c in coefficients[3:])) if p else QValue(())
    return MirrorPolynomial(t, tuple(coeffs)), q


# ---------------------------------------------------------------------------
# flag changes


@dataclass(frozen=True)
class CoordinateChange:
    """New variables ``X' = X^a Y^b u1``, ``Y' = X^c Y^d u2`` for a flag.

    The old polynomial factors as ``H = prefactor * X^shift.m Y^shift.n * H'``.
    """

    matrix: tuple[tuple[int, int], tuple[int, int]]
    multipliers: tuple[QMonomial, QMonomial]
    prefactor: QMonomial
    shift: LatticePoint
    flag: Flag

    def forward(self, q, x, y):
        """Map old coordinates to the flag chart."""
        (a, b), (c, d) = self.matrix
        qv = as_qvalue(q, self.prefactor.p)
        u1, u2 = (m.value(qv) for m in self.multipliers)
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        return x ** a * y ** b * u1, x ** c * y ** d * u2

    def inverse(self, q, xp, yp):
        """Map chart coordinates back; the matrix has det 1 so this is monomial."""
        (a, b), (c, d) = self.matrix
        qv = as_qvalue(q, self.prefactor.p)
        u1, u2 = (m.value(qv) for m in self.multipliers)
        X = np.asarray(xp, dtype=complex) / u1
        Y = np.asarray(yp, dtype=complex) / u2
        return X ** d * Y ** (-b), X ** (-c) * Y ** a

    def forward_log(self, q, w):
        """Chart log-absolute coordinates of the point with logs ``w``."""
        (a, b), (c, d) = self.matrix
        qv = as_qvalue(q, self.prefactor.p)
        l1, l2 = (m.log_abs(qv) for m in self.multipliers)
        w = np.asarray(w, dtype=float)
        return np.array([a * w[..., 0] + b * w[..., 1] + l1, c * w[..., 0] + d * w[..., 1] + l2]).T

    def inverse_log(self, q, wp):
        (a, b), (c, d) = self.matrix
        qv = as_qvalue(q, self.prefactor.p)
        l1, l2 = (m.log_abs(qv) for m in self.multipliers)
        wp = np.asarray(wp, dtype=float)
        u = wp[..., 0] - l1
        v = wp[..., 1] - l2
        return np.array([d * u - b * v, -c * u + a * v]).T


def change_flag(H: MirrorPolynomial, f: Flag) -> tuple[MirrorPolynomial, CoordinateChange]:
    """Rewrite ``H`` in the chart of flag ``f``.

    The new triangulation has the flag coordinates of the old points (same
    index order, same triangles); its base points are again
    ``(1,0), (0,1), (0,0)`` at the positions of ``i1, i2, i3``, so indices
    are permuted to keep the base-point convention.
    """
    t = H.triangulation
    a_ = H.coefficients
    i3, i1, i2 = f.origin, f.first, f.second
    new_pts = [LatticePoint(*flag_coordinates(f, b)) for b in t.points]
    new_coef = []
    for j in range(t.n_points):
        m, n = new_pts[j]
        new_coef.append(a_[j] * a_[i3] ** (m + n - 1) / (a_[i1] ** m * a_[i2] ** n))
    order = [i1, i2, i3] + [j for j in range(t.n_points) if j not in (i1, i2, i3)]
    pos = {old: k for k, old in enumerate(order)}
    t2 = Triangulation(tuple(new_pts[j] for j in order),
                       tuple(tuple(pos[v] for v in tri) for tri in t.triangles))
    H2 = MirrorPolynomial(t2, tuple(new_coef[j] for j in order))
    # b - origin = m' e1 + n' e2, so x^m y^n = x^o y^o' (x^e1)^{m'} (x^e2)^{n'}:
    # the chart variables are the monomials x^{e1}, x^{e2} rescaled.
    change = CoordinateChange(
        matrix=((f.e1.m, f.e1.n), (f.e2.m, f.e2.n)),
        multipliers=(a_[i1] / a_[i3], a_[i2] / a_[i3]),
        prefactor=a_[i3],
        shift=f.b_origin,
        flag=f,
    )
    return H2, change


def term_permutation(H: MirrorPolynomial, f: Flag) -> list[int]:
    """Old point index of each point of ``change_flag(H, f)[0]``."""
    n = H.triangulation.n_points
    return [f.first, f.second, f.origin] + [j for j in range(n) if j not in f.indices]


def _require_nonconstant(mono: QMonomial, what: str) -> QMonomial:
    if mono.is_constant:
        raise RatioPropertyError(f"{what} is constant ({mono})")
    if any(e < 0 for e in mono.exponents):
        raise RatioPropertyError(f"{what} has a negative exponent ({mono})")
    return mono


def ratio_monomial_collinear(H: MirrorPolynomial, i1: int, i2: int, i3: int) -> QMonomial:
    """``a_{i1} a_{i3} / a_{i2}^2`` for a collinear triple with midpoint ``i2``."""
    t = H.triangulation
    b1, b2, b3 = (t.points[i] for i in (i1, i2, i3))
    if (2 * b2.m, 2 * b2.n) != (b1.m + b3.m, b1.n + b3.n):
        raise PreconditionError(f"b{i2 + 1} is not the midpoint of b{i1 + 1} and b{i3 + 1}")
    if (min(i1, i2), max(i1, i2)) not in set(t.edges()):
        raise PreconditionError(f"b{i1 + 1} and b{i2 + 1} are not joined by an edge")
    a = H.coefficients
    return _require_nonconstant(a[i1] * a[i3] / a[i2] ** 2, f"ratio for b{i1 + 1}, b{i2 + 1}, b{i3 + 1}")


def ratio_monomial_flag(H: MirrorPolynomial, f: Flag, i4: int) -> QMonomial:
    """``a_{i4} a_{i3}^{m'+n'-1} / (a_{i1}^{m'} a_{i2}^{n'})`` for ``i4`` off the flag."""
    if i4 in f.indices:
        raise PreconditionError(f"b{i4 + 1} lies on the flag's triangle")
    m, n = flag_coordinates(f, H.points[i4])
    a = H.coefficients
    r = a[i4] * a[f.origin] ** (m + n - 1) / (a[f.first] ** m * a[f.second] ** n)
    return _require_nonconstant(r, f"flag ratio for b{i4 + 1}")


def collinear_triples(t: Triangulation) -> list[tuple[int, int, int]]:
    """Triples ``(i1, i2, i3)`` with ``b_{i2}`` the midpoint and ``{i1, i2}`` an edge."""
    out = []
    pts = t.points
    index = {p: k for k, p in enumerate(pts)}
    for i1, i2 in t.edges():
        for a, b in ((i1, i2), (i2, i1)):
            far = LatticePoint(2 * pts[b].m - pts[a].m, 2 * pts[b].n - pts[a].n)
            if far in index:
                out.append((a, b, index[far]))
    return out


@dataclass
class RegimeReport:
    q: QValue | None
    certificates: dict[str, bool]
    failing: str | None = None
    attempts: int = 0


def check_regime(H: MirrorPolynomial, q, certificates=("dominance", "spine", "ratio")) -> dict[str, str | None]:
    """Run the large-radius certificates at ``q``; values are ``None`` or a failure note."""
    from .amoeba import dominance_certificate
    from .tropical import spine_coefficients

    q = H.qvalue(q)
    out: dict[str, str | None] = {}
    for cert in certificates:
        if cert == "dominance":
            bad = [i for i in range(H.triangulation.n_points) if dominance_certificate(H, q, i) is None]
            out[cert] = None if not bad else f"no dominance witness for b{bad[0] + 1}"
        elif cert == "spine":
            try:
                sc = spine_coefficients(H, q)
                dev = np.abs(sc.gammas - sc.log_abs)
                out[cert] = None if np.all(dev < 1) else f"|gamma - log|a|| = {dev.max():.3g} >= 1"
            except RegimeError as e:
                out[cert] = str(e)
        elif cert == "ratio":
            worst = 0.0
            t = H.triangulation
            try:
                for tr in collinear_triples(t):
                    worst = max(worst, abs(ratio_monomial_collinear(H, *tr).value(q)))
                for f in enumerate_flags(t):
                    for i4 in range(t.n_points):
                        if i4 not in f.indices:
                            worst = max(worst, abs(ratio_monomial_flag(H, f, i4).value(q)))
            except RatioPropertyError as e:
                out[cert] = str(e)
                continue
            out[cert] = None if worst < 0.2 else f"largest ratio monomial {worst:.3g} >= 1/5"
        else:
            raise ValueError(f"unknown certificate {cert!r}")
    return out


def suggest_q(H: MirrorPolynomial, certificates=("dominance", "spine", "ratio"), floor: float = 1e-12) -> QValue:
    """Largest ``q = 2^-k`` (all components equal, ``k >= 1``) passing the certificates."""
    p = H.p
    qc = 0.5
    last = None
    while qc >= floor:
        q = as_qvalue(qc, p)
        res = check_regime(H, q, certificates)
        fails = [k for k in certificates if res[k] is not None]
        if not fails:
            return q
        last = (fails[0], res[fails[0]])
        if p == 0:
            break
        qc /= 2
    raise RegimeError(f"no q above {floor:g} passes; first failing certificate: {last[0]} ({last[1]})")
