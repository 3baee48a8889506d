"""Command-line interface: ``tropimirror <command> <fan> [options]``.

Every command prints a JSON report (or writes it to ``--report``). Exit
codes: 0 all checks pass, 1 a verdict fails, 2 usage or IO error, 3 the
parameters are outside the certified regime.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import sys
from pathlib import Path

from . import fanio
from .amoeba import (
    Membership,
    TooCloseToAmoebaError,
    amoeba_membership,
    component_degree,
    raster_amoeba,
)
from .lattice import flag_coordinate_bound, genus, lattice_points_in_hull, validate_triangulation
from .mirror import PreconditionError, RegimeError, assign_heights, NonRegularTriangulationError
from .realcurve import DegenerateSpineError, cyclic_m_check, pants_decomposition
from .render import LAYERS, render_svg, spine_of, write_pgm
from .tropical import balancing_check, dual_check, spine_coefficients, tropical_hypersurface, tropical_polynomial

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_REGIME = 0, 1, 2, 3
_NEGATIVE_VALUE_FLAGS = ("--point", "--bbox")


class UsageError(Exception):
    pass


def _floats(text: str, n: int, name: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"{name} expects {n} comma-separated numbers, got {text!r}") from None
    if len(vals) != n or not all(math.isfinite(v) for v in vals):
        raise UsageError(f"{name} expects {n} comma-separated numbers, got {text!r}")
    return vals


def _join_negative_values(argv):
    """``--point -3,-3`` would read as an option; rewrite it to ``--point=-3,-3``."""
    out = []
    k = 0
    while k < len(argv):
        a = argv[k]
        if a in _NEGATIVE_VALUE_FLAGS and k + 1 < len(argv) and argv[k + 1].startswith("-"):
            out.append(f"{a}={argv[k + 1]}")
            k += 2
        else:
            out.append(a)
            k += 1
    return out


# ---------------------------------------------------------------------------
# commands; each returns (report, exit code)


def cmd_validate(args):
    t = fanio.read_triangulation(args.fan)
    rep = validate_triangulation(t)
    payload = {
        "points": [list(p) for p in t.points],
        "triangles": [list(tri) for tri in t.triangles],
        "violations": [{"kind": v.kind, "message": v.message, "triangle": v.triangle} for v in rep.violations],
    }
    if not rep.ok:
        return fanio.make_report("validate", "FAIL", **payload), EXIT_FAIL
    fan = fanio.parse_fan_file(args.fan)
    try:
        heights = list(assign_heights(t))
    except NonRegularTriangulationError:
        heights = None
    payload.update(
        genus=genus(t),
        flag_bound=flag_coordinate_bound(t),
        heights=heights,
        polynomial=str(fan.polynomial),
        q=list(fan.q.values),
        follows_sign_rule=fan.polynomial.follows_sign_rule(),
    )
    return fanio.make_report("validate", "PASS", **payload), EXIT_PASS


def cmd_spine(args):
    fan = fanio.parse_fan_file(args.fan)
    H, q = fan.polynomial, fan.q
    sc = spine_coefficients(H, q, args.tol)
    curve = tropical_hypersurface(tropical_polynomial(H, q, args.tol))
    balanced = balancing_check(curve)
    if args.svg:
        render_svg(H, q, ("spine",), out=args.svg)
    payload = {
        "gammas": sc.gammas,
        "log_abs_coefficients": sc.log_abs,
        "k_max": sc.k_max,
        "tail_bounds": sc.tail_bounds,
        "witnesses": sc.witnesses,
        "dominance_ratios": sc.ratios,
        "vertices": [v.point for v in curve.vertices],
        "edges": [{"terms": list(e.terms), "kind": e.kind, "direction": list(e.direction),
                   "start": e.start, "end": e.end} for e in curve.edges],
        "balanced": balanced,
    }
    return fanio.make_report("spine", "PASS" if balanced else "FAIL", **payload), (EXIT_PASS if balanced else EXIT_FAIL)


def cmd_dual_check(args):
    fan = fanio.parse_fan_file(args.fan)
    cert = dual_check(fan.polynomial, fan.q, args.tol)
    t = fan.triangulation
    payload = {
        "one_cells": cert.n_one_cells,
        "triangulation_edges": len(t.edges()),
        "missing_edges": cert.missing_edges,
        "extra_edges": cert.extra_edges,
        "message": cert.message,
    }
    if cert.witness is not None:
        payload["witness"] = {"ok": cert.witness.ok, "reason": cert.witness.reason}
    return fanio.make_report("dual-check", cert.verdict, **payload), (EXIT_PASS if cert.ok else EXIT_FAIL)


def cmd_amoeba(args):
    fan = fanio.parse_fan_file(args.fan)
    bbox = _floats(args.bbox, 4, "--bbox")
    if not (bbox[0] < bbox[1] and bbox[2] < bbox[3]):
        raise UsageError("--bbox needs x0 < x1 and y0 < y1")
    if args.res < 2:
        raise UsageError("--res must be at least 2")
    r = raster_amoeba(fan.polynomial, fan.q, tuple(bbox), args.res)
    if args.out:
        write_pgm(r, args.out)
    hull_pts = {tuple(p) for p in lattice_points_in_hull(fan.triangulation.hull)}
    classes = r.degree_classes()
    stray = [c for c in classes if c not in hull_pts]
    payload = {"bbox": bbox, "res": args.res, "counts": r.counts(), "degree_classes": classes,
               "degrees_outside_polygon": stray}
    if args.out:
        payload["pgm"] = str(args.out)
    ok = not stray
    return fanio.make_report("amoeba", "PASS" if ok else "FAIL", **payload), (EXIT_PASS if ok else EXIT_FAIL)


def cmd_order(args):
    fan = fanio.parse_fan_file(args.fan)
    w = _floats(args.point, 2, "--point")
    H, q = fan.polynomial, fan.q
    mem = amoeba_membership(H, q, w)
    if mem is Membership.INSIDE:
        return fanio.make_report("order", "FAIL", point=w, membership=mem.name.lower(),
                                 message="point lies on the amoeba"), EXIT_FAIL
    try:
        res = component_degree(H, q, w)
    except TooCloseToAmoebaError as e:
        return fanio.make_report("order", "UNCERTAIN", point=w, membership=mem.name.lower(),
                                 message=str(e)), EXIT_REGIME
    return fanio.make_report("order", "PASS", point=w, membership=mem.name.lower(), degree=res.degree,
                             residues=res.residues, samples=res.samples,
                             argument_count=res.winding_check), EXIT_PASS


def cmd_cyclic_m(args):
    fan = fanio.parse_fan_file(args.fan)
    r = cyclic_m_check(fan.polynomial, fan.q, args.grid)
    c = r.components
    payload = {
        "m_curve": c.is_m_curve,
        "cyclic_m": r.verdict,
        "conditions": r.conditions,
        "causes": r.causes,
        "components": {
            "total": c.total,
            "genus": c.genus,
            "ovals": [{"quadrant": o.quadrant, "sample": o.sample,
                       "domain_point": None if o.domain_point is None
                       else list(fan.triangulation.points[o.domain_point])} for o in c.ovals],
            "meets_axes": c.unbounded,
            "axis_cycles": c.cycles,
            "irregular": c.irregular,
            "box": c.box,
            "grid_res": c.grid_res,
        },
        "axes": [{"side": a.side, "length": a.length, "roots": a.roots, "intervals": a.intervals,
                  "ok": a.ok, "note": a.note} for a in r.axes],
    }
    if r.arcs is not None:
        payload["arcs"] = [{"kind": a.kind, "axes": a.axes, "ends": a.ends, "ok": a.ok,
                            "samples": a.samples, "note": a.note} for a in r.arcs.arcs]
    verdict = "TRUE" if r.verdict else "FALSE"
    return fanio.make_report("cyclic-m", verdict, **payload), (EXIT_PASS if r.verdict else EXIT_FAIL)


def cmd_pants(args):
    fan = fanio.parse_fan_file(args.fan)
    curve = spine_of(fan.polynomial, fan.q)
    try:
        p = pants_decomposition(curve)
    except DegenerateSpineError as e:
        return fanio.make_report("pants", "FAIL", message=str(e)), EXIT_REGIME
    payload = {"pants": p.pants, "tubes": p.tubes, "legs": p.legs, "euler": p.euler,
               "expected_euler": p.expected_euler, "genus": p.genus, "boundary_points": p.boundary_points}
    return fanio.make_report("pants", "PASS" if p.ok else "FAIL", **payload), (EXIT_PASS if p.ok else EXIT_FAIL)


def cmd_render(args):
    fan = fanio.parse_fan_file(args.fan)
    layers = [s.strip() for s in args.layers.split(",") if s.strip()]
    bad = [l for l in layers if l not in LAYERS]
    if bad or not layers:
        raise UsageError(f"unknown layers {bad}; choose from {','.join(LAYERS)}")
    text = render_svg(fan.polynomial, fan.q, layers, out=args.out, res=args.res)
    digest = hashlib.sha256(text.encode()).hexdigest()
    return fanio.make_report("render", "PASS", layers=layers, svg=str(args.out), sha256=digest), EXIT_PASS


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tropimirror", description="Mirror curves, amoebas and tropical spines.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("fan", help="fan file (JSON)")
        sp.add_argument("--report", help="write the JSON report here instead of stdout")
        sp.set_defaults(func=func)
        return sp

    add("validate", cmd_validate, "check the triangulation and print the polynomial")
    sp = add("spine", cmd_spine, "spine coefficients and the tropical curve")
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--svg")
    sp = add("dual-check", cmd_dual_check, "spine subdivision dual to the triangulation")
    sp.add_argument("--tol", type=float, default=1e-6)
    sp = add("amoeba", cmd_amoeba, "raster the amoeba over a box")
    sp.add_argument("--bbox", required=True, help="x0,x1,y0,y1")
    sp.add_argument("--res", type=int, required=True)
    sp.add_argument("--out", help="PGM output path")
    sp = add("order", cmd_order, "degree of the complement component at a point")
    sp.add_argument("--point", required=True, help="w1,w2")
    sp = add("cyclic-m", cmd_cyclic_m, "M-curve and cyclic-M conditions")
    sp.add_argument("--grid", type=int, default=512)
    add("pants", cmd_pants, "pairs-of-pants count from the spine")
    sp = add("render", cmd_render, "SVG overlay")
    sp.add_argument("--layers", default=",".join(LAYERS))
    sp.add_argument("--out", required=True)
    sp.add_argument("--res", type=int, default=128)
    return p


def _emit(report: dict, path) -> None:
    text = fanio.dumps_report(report)
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def cli_main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_join_negative_values(argv))
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_PASS
    try:
        report, code = args.func(args)
    except (UsageError, fanio.FanFileError, OSError) as e:
        print(f"tropimirror: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (RegimeError, PreconditionError) as e:
        report, code = fanio.make_report(args.command, "OUT_OF_REGIME", message=str(e)), EXIT_REGIME
    try:
        _emit(report, args.report)
    except OSError as e:
        print(f"tropimirror: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    return code


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
