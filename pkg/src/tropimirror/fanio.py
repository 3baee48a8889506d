"""Fan files and JSON reports.

A fan file is a JSON document::

    {"points": [[1,0],[0,1],[0,0],[-1,-1]],
     "triangles": [[2,0,1],[2,1,3],[2,3,0]],
     "coeffs": {"mode": "auto-heights", "q": 0.01}}

``coeffs.mode`` is ``"auto-heights"`` (one parameter ``q``), ``"explicit"``
(``exponents`` is a ``p x p`` matrix, ``q`` a list of ``p`` values) or
``"terms"`` (``values`` lists one numeric coefficient per point). An optional
``signs`` list overrides the parity sign rule in the first two modes.
Decimal literals and ``"p/q"`` strings are read as exact fractions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .lattice import Triangulation, validate_triangulation
from .mirror import MirrorPolynomial, QValue, build_mirror_polynomial, polynomial_from_terms

REPORT_VERSION = "1.0"


class FanFileError(ValueError):
    pass


@dataclass
class FanFile:
    triangulation: Triangulation
    polynomial: MirrorPolynomial
    q: QValue
    coeffs: dict = field(default_factory=dict)
    signs: tuple[int, ...] | None = None


def _rational(v, where: str) -> Fraction:
    if isinstance(v, bool):
        raise FanFileError(f"{where}: expected a number, got {v!r}")
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    if isinstance(v, str):
        try:
            return Fraction(v.strip())
        except (ValueError, ZeroDivisionError):
            pass
    raise FanFileError(f"{where}: expected a number, got {v!r}")


def _integer(v, where: str) -> int:
    r = _rational(v, where)
    if r.denominator != 1:
        raise FanFileError(f"{where}: expected an integer, got {v!r}")
    return int(r)


def _positive_list(v, where: str) -> list[Fraction]:
    vals = v if isinstance(v, list) else [v]
    out = [_rational(x, f"{where}[{k}]") for k, x in enumerate(vals)]
    if any(x <= 0 for x in out):
        raise FanFileError(f"{where}: parameter values must be positive")
    return out


def _parse_doc(text: str, source: str):
    try:
        doc = json.loads(text, parse_float=Fraction, parse_int=int)
    except json.JSONDecodeError as e:
        raise FanFileError(f"{source}:{e.lineno}:{e.colno}: {e.msg}") from None
    if not isinstance(doc, dict):
        raise FanFileError(f"{source}: top level must be an object")
    for key in ("points", "triangles", "coeffs"):
        if key not in doc:
            raise FanFileError(f"{source}: missing field {key!r}")
    try:
        pts = [(_integer(p[0], f"points[{k}]"), _integer(p[1], f"points[{k}]")) for k, p in enumerate(doc["points"])]
        if any(len(p) != 2 for p in doc["points"]):
            raise FanFileError("points must be pairs")
        tris = [tuple(_integer(v, f"triangles[{k}]") for v in tri) for k, tri in enumerate(doc["triangles"])]
        if any(len(tri) != 3 for tri in tris):
            raise FanFileError("triangles must be index triples")
    except (TypeError, IndexError) as e:
        raise FanFileError(f"{source}: malformed points/triangles ({e})") from None
    try:
        t = Triangulation(tuple(pts), tuple(tris))
    except ValueError as e:
        raise FanFileError(f"{source}: {e}") from None
    return doc, t


def loads_triangulation(text: str, source: str = "<string>") -> Triangulation:
    """The triangulation of a fan document, not yet validated."""
    return _parse_doc(text, source)[1]


def loads_fan(text: str, source: str = "<string>") -> FanFile:
    doc, t = _parse_doc(text, source)
    rep = validate_triangulation(t)
    if not rep.ok:
        raise FanFileError(f"{source}: invalid triangulation\n{rep}")
    c = doc["coeffs"]
    if not isinstance(c, dict) or "mode" not in c:
        raise FanFileError(f"{source}: coeffs must be an object with a mode")
    mode = c["mode"]
    signs = doc.get("signs")
    if signs is not None:
        signs = tuple(_integer(s, "signs") for s in signs)
    p = t.n_points - 3
    try:
        if mode == "auto-heights":
            qs = _positive_list(c.get("q", []), "coeffs.q") if p else []
            if p and len(qs) != 1:
                raise FanFileError(f"{source}: auto-heights takes a single q")
            H = build_mirror_polynomial(t, "auto-heights", signs=signs)
            q = QValue(tuple(float(x) for x in qs))
        elif mode == "explicit":
            exps = [[_integer(v, "coeffs.exponents") for v in row] for row in c.get("exponents", [])]
            qs = _positive_list(c.get("q", []), "coeffs.q") if p else []
            if len(qs) != p:
                raise FanFileError(f"{source}: explicit mode needs {p} values of q")
            H = build_mirror_polynomial(t, "explicit", exps, signs=signs)
            q = QValue(tuple(float(x) for x in qs))
        elif mode == "terms":
            vals = [_rational(v, f"coeffs.values[{k}]") for k, v in enumerate(c.get("values", []))]
            if any(v == 0 for v in vals):
                raise FanFileError(f"{source}: term coefficients must be non-zero")
            H, q = polynomial_from_terms(t.points, t.triangles, [float(v) for v in vals])
        else:
            raise FanFileError(f"{source}: unknown coeffs mode {mode!r}")
    except FanFileError:
        raise
    except ValueError as e:
        raise FanFileError(f"{source}: {e}") from None
    return FanFile(t, H, q, _normalize_coeffs(c), signs)


def _read(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise FanFileError(f"{path}: {e.strerror}") from None


def parse_fan_file(path) -> FanFile:
    return loads_fan(_read(path), str(path))


def read_triangulation(path) -> Triangulation:
    return loads_triangulation(_read(path), str(path))


def _normalize_coeffs(c: dict) -> dict:
    out = {"mode": c["mode"]}
    for k in ("q", "exponents", "values"):
        if k in c:
            out[k] = c[k]
    return out


def _fan_number(v):
    # keep decimal literals as numbers when they re-read to the same fraction
    if isinstance(v, Fraction) and v.denominator != 1:
        f = float(v)
        return f if Fraction(repr(f)) == v else str(v)
    if isinstance(v, dict):
        return {k: _fan_number(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_fan_number(x) for x in v]
    return v


def dumps_fan(fan: FanFile) -> str:
    doc = {
        "points": [[int(p.m), int(p.n)] for p in fan.triangulation.points],
        "triangles": [list(tri) for tri in fan.triangulation.triangles],
        "coeffs": fan.coeffs,
    }
    if fan.signs is not None:
        doc["signs"] = list(fan.signs)
    return json.dumps(to_jsonable(_fan_number(doc)), indent=2) + "\n"


def write_fan_file(fan: FanFile, path) -> None:
    Path(path).write_text(dumps_fan(fan))


# ---------------------------------------------------------------------------
# reports


def to_jsonable(obj):
    """Plain JSON values; fractions become exact strings, non-finite floats strings."""
    if isinstance(obj, Fraction):
        return str(obj) if obj.denominator != 1 else int(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, complex):
        return [to_jsonable(obj.real), to_jsonable(obj.imag)]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def make_report(command: str, verdict: str, **payload) -> dict:
    rep = {"version": REPORT_VERSION, "command": command, "verdict": verdict}
    rep.update(payload)
    return to_jsonable(rep)


def dumps_report(rep: dict) -> str:
    return json.dumps(rep, indent=2, sort_keys=True) + "\n"


def load_report(path) -> dict:
    doc = json.loads(Path(path).read_text())
    if "version" not in doc:
        raise ValueError("report has no version field")
    return doc
