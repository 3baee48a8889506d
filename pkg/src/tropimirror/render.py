"""SVG overlays and PGM rasters.

Output is text built in a fixed order with fixed float formatting, so the
same inputs give byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .amoeba import INSIDE, OUTSIDE, UNCERTAIN, AmoebaRaster, raster_amoeba
from .mirror import MirrorPolynomial, RegimeError
from .tropical import TropicalCurve, naive_tropicalization, tropical_hypersurface, tropical_polynomial

LAYERS = ("amoeba", "spine", "dual", "realcurve")
QUADRANT_COLORS = {(1, 1): "#1f5fbf", (-1, 1): "#2e8b57", (-1, -1): "#7b3fa0", (1, -1): "#d2691e"}


def _f(x: float) -> str:
    s = f"{x:.4f}"
    return "0.0000" if s == "-0.0000" else s


def pgm_bytes(raster: AmoebaRaster) -> bytes:
    """Binary PGM: Inside 0, Uncertain 128, Outside 160..255 by degree class."""
    classes = raster.degree_classes()
    shade = {}
    n = len(classes)
    for k, c in enumerate(classes):
        shade[c] = 255 if n == 1 else 160 + (95 * k) // (n - 1)
    ny, nx = raster.shape
    img = np.zeros((ny, nx), dtype=np.uint8)
    img[raster.labels == UNCERTAIN] = 128
    out = raster.labels == OUTSIDE
    for (a, b), v in shade.items():
        img[out & (raster.degrees[..., 0] == a) & (raster.degrees[..., 1] == b)] = v
    img = img[::-1]  # first row is the largest w2
    return f"P5\n{nx} {ny}\n255\n".encode() + img.tobytes()


def write_pgm(raster: AmoebaRaster, path) -> None:
    Path(path).write_bytes(pgm_bytes(raster))


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    nx, ny = int(parts[1]), int(parts[2])
    return np.frombuffer(parts[4][: nx * ny], dtype=np.uint8).reshape(ny, nx)


def spine_of(H: MirrorPolynomial, q) -> TropicalCurve:
    try:
        T = tropical_polynomial(H, q)
    except RegimeError:
        T = naive_tropicalization(H, q)
    return tropical_hypersurface(T)


def view_box(curve: TropicalCurve, margin: float = 0.1, min_size: float = 2.0):
    x0, x1, y0, y1 = curve.bbox()
    w = max(x1 - x0, min_size)
    h = max(y1 - y0, min_size)
    cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
    w, h = w * (1 + 2 * margin), h * (1 + 2 * margin)
    return (cx - w / 2, cx + w / 2, cy - h / 2, cy + h / 2)


def _segment(a, b, style: str) -> str:
    # SVG y grows downwards
    return (f'<line x1="{_f(a[0])}" y1="{_f(-a[1])}" x2="{_f(b[0])}" y2="{_f(-b[1])}" {style}/>')


def _cell_ends(curve: TropicalCurve, e, reach: float):
    if e.kind == "edge":
        return curve.vertices[e.start].point, curve.vertices[e.end].point
    d = np.array(e.direction, dtype=float)
    d /= np.linalg.norm(d)
    if e.kind == "ray":
        p = curve.vertices[e.start].point
        return p, p + reach * d
    return e.anchor - reach * d, e.anchor + reach * d


def render_svg(H: MirrorPolynomial, q, layers=LAYERS, out=None, res: int = 128, grid_res: int = 256) -> str:
    """Overlay of the requested layers over the spine's box plus 10%."""
    unknown = set(layers) - set(LAYERS)
    if unknown:
        raise ValueError(f"unknown layers {sorted(unknown)}")
    layers = [l for l in LAYERS if l in set(layers)]
    qv = H.qvalue(q)
    curve = spine_of(H, qv)
    x0, x1, y0, y1 = view_box(curve)
    reach = 2 * (abs(x1 - x0) + abs(y1 - y0))
    lw = 0.004 * max(x1 - x0, y1 - y0)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{_f(x0)} {_f(-y1)} {_f(x1 - x0)} {_f(y1 - y0)}" '
        f'width="600" height="{int(round(600 * (y1 - y0) / (x1 - x0)))}">',
        f'<rect x="{_f(x0)}" y="{_f(-y1)}" width="{_f(x1 - x0)}" height="{_f(y1 - y0)}" fill="white"/>',
    ]
    if "amoeba" in layers:
        r = raster_amoeba(H, qv, (x0, x1, y0, y1), res)
        ny, nx = r.shape
        dx, dy = (x1 - x0) / nx, (y1 - y0) / ny
        lines.append('<g id="amoeba" fill="#d62728" stroke="none">')
        for j in range(ny):
            row = r.labels[j] == INSIDE
            k = 0
            while k < nx:
                if row[k]:
                    s = k
                    while k < nx and row[k]:
                        k += 1
                    lines.append(f'<rect x="{_f(x0 + s * dx)}" y="{_f(-(y0 + (j + 1) * dy))}" '
                                 f'width="{_f((k - s) * dx)}" height="{_f(dy)}"/>')
                else:
                    k += 1
        lines.append("</g>")
    if "realcurve" in layers:
        from .realcurve import count_real_components

        comp = count_real_components(H, qv, grid_res, box=(x0, x1, y0, y1))
        lines.append('<g id="realcurve" fill="none">')
        order = sorted(range(len(comp.pieces)),
                       key=lambda k: (comp.pieces[k].quadrant, tuple(np.round(comp.pieces[k].segments[0, 0], 6))))
        for k in order:
            p = comp.pieces[k]
            d = " ".join(f"M{_f(a[0])} {_f(-a[1])}L{_f(b[0])} {_f(-b[1])}" for a, b in p.segments)
            lines.append(f'<path d="{d}" stroke="{QUADRANT_COLORS[p.quadrant]}" stroke-width="{_f(lw)}"/>')
        lines.append("</g>")
    if "spine" in layers:
        lines.append(f'<g id="spine" stroke="black" stroke-width="{_f(1.5 * lw)}">')
        for e in curve.edges:
            a, b = _cell_ends(curve, e, reach)
            lines.append(_segment(a, b, ""))
        lines.append("</g>")
    if "dual" in layers:
        pts = H.exponents
        scale = 0.06 * max(x1 - x0, y1 - y0)
        lines.append(f'<g id="dual" stroke="#555555" stroke-width="{_f(lw)}" stroke-dasharray="{_f(4 * lw)}">')
        for e in curve.edges:
            i, j = e.terms
            if e.kind == "edge":
                a, b = _cell_ends(curve, e, reach)
                mid = 0.5 * (a + b)
            elif e.kind == "ray":
                d = np.array(e.direction, dtype=float)
                mid = curve.vertices[e.start].point + 0.25 * (x1 - x0) * d / np.linalg.norm(d)
            else:
                mid = e.anchor
            v = (pts[j] - pts[i]).astype(float)
            v *= scale / np.linalg.norm(v)
            lines.append(_segment(mid - v / 2, mid + v / 2, ""))
        lines.append("</g>")
    lines.append("</svg>")
    text = "\n".join(lines) + "\n"
    if out is not None:
        Path(out).write_text(text)
    return text
