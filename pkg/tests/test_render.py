import re

import numpy as np
import pytest

from tropimirror.amoeba import INSIDE, OUTSIDE, UNCERTAIN, raster_amoeba
from tropimirror.examples import local_p2, single_triangle, trapezoid
from tropimirror.render import pgm_bytes, read_pgm, render_svg, spine_of, view_box, write_pgm


def test_spine_only_line_is_a_y():
    H, q = single_triangle()
    svg = render_svg(H, q, ["spine"])
    group = svg.split('<g id="spine"', 1)[1].split("</g>", 1)[0]
    assert group.count("<line") == 3
    assert 'id="amoeba"' not in svg


def test_full_overlay_local_p2(tmp_path):
    H, q = local_p2(0.01)
    out = tmp_path / "lp2.svg"
    text = render_svg(H, q, ("amoeba", "spine", "dual", "realcurve"), out=out, res=48)
    assert out.read_text() == text
    for layer in ("amoeba", "spine", "dual", "realcurve"):
        assert f'<g id="{layer}"' in text
    spine = text.split('<g id="spine"', 1)[1].split("</g>", 1)[0]
    # three bounded edges and three rays
    assert spine.count("<line") == 6
    assert 'fill="#d62728"' in text


def test_layer_order_is_fixed():
    H, q = local_p2(0.01)
    a = render_svg(H, q, ["spine", "amoeba"], res=24)
    b = render_svg(H, q, ["amoeba", "spine"], res=24)
    assert a == b
    assert a.index('id="amoeba"') < a.index('id="spine"')


def test_svg_is_byte_identical():
    H, q = trapezoid()
    a = render_svg(H, q, res=32, grid_res=256)
    b = render_svg(H, q, res=32, grid_res=256)
    assert a == b


def test_view_box_covers_spine():
    H, q = trapezoid()
    curve = spine_of(H, q)
    x0, x1, y0, y1 = view_box(curve)
    bx0, bx1, by0, by1 = curve.bbox()
    assert x0 < bx0 and x1 > bx1 and y0 < by0 and y1 > by1
    svg = render_svg(H, q, ["spine"])
    vb = [float(v) for v in re.search(r'viewBox="([^"]+)"', svg).group(1).split()]
    assert vb[0] == pytest.approx(x0, abs=1e-4)
    assert vb[2] == pytest.approx(x1 - x0, abs=1e-4)


def test_unknown_layer():
    H, q = single_triangle()
    with pytest.raises(ValueError):
        render_svg(H, q, ["spine", "glitter"])


def test_pgm_shading(tmp_path):
    H, q = local_p2(0.01)
    r = raster_amoeba(H, q, (-8, 8, -8, 8), 40)
    data = pgm_bytes(r)
    assert data.startswith(b"P5\n40 40\n255\n")
    p = tmp_path / "a.pgm"
    write_pgm(r, p)
    img = read_pgm(p)
    flipped = img[::-1]
    assert np.all(flipped[r.labels == INSIDE] == 0)
    assert np.all(flipped[r.labels == UNCERTAIN] == 128)
    shades = set(np.unique(flipped[r.labels == OUTSIDE]))
    assert len(shades) == len(r.degree_classes())
    assert min(shades) >= 160 and max(shades) == 255


def test_read_pgm_rejects_other_formats(tmp_path):
    p = tmp_path / "x.pgm"
    p.write_bytes(b"P2\n1 1\n255\n0\n")
    with pytest.raises(ValueError):
        read_pgm(p)
