import json
from fractions import Fraction
from pathlib import Path

import pytest

from tropimirror.fanio import (
    REPORT_VERSION,
    FanFileError,
    dumps_fan,
    dumps_report,
    load_report,
    loads_fan,
    make_report,
    parse_fan_file,
    write_fan_file,
)

FANS = Path(__file__).resolve().parents[1] / "fans"

LP2_DOC = {
    "points": [[1, 0], [0, 1], [0, 0], [-1, -1]],
    "triangles": [[2, 0, 1], [2, 1, 3], [2, 3, 0]],
    "coeffs": {"mode": "auto-heights", "q": 0.01},
}


def _doc(**changes):
    d = json.loads(json.dumps(LP2_DOC))
    d.update(changes)
    return json.dumps(d)


def test_parse_local_p2():
    fan = parse_fan_file(FANS / "local_p2.json")
    assert fan.triangulation.n_points == 4
    assert len(fan.triangulation.triangles) == 3
    assert str(fan.polynomial) == "x + y + 1 - q1*x^-1y^-1"
    assert fan.q.values == (0.01,)


def test_decimal_literals_are_exact():
    fan = loads_fan(_doc())
    assert fan.coeffs["q"] == Fraction(1, 100)


def test_explicit_trapezoid():
    fan = parse_fan_file(FANS / "trapezoid.json")
    a = [str(c) for c in fan.polynomial.coefficients]
    assert a[3] == "q1" and a[4] == "-q1*q2"
    assert fan.q.values == (1 / 128, 1 / 128)


def test_terms_mode():
    fan = parse_fan_file(FANS / "cubic_fan.json")
    assert fan.polynomial.coefficient_values(fan.q)[3] == pytest.approx(-0.02)


def test_all_shipped_fans_parse():
    for path in sorted(FANS.glob("*.json")):
        parse_fan_file(path)


def test_convention_error():
    text = _doc(points=[[0, 1], [1, 0], [0, 0], [-1, -1]])
    with pytest.raises(FanFileError, match="convention"):
        loads_fan(text, "bad.json")


def test_syntax_error_has_line_and_column():
    text = '{\n  "points": [[1, 0],\n  oops\n}'
    with pytest.raises(FanFileError) as e:
        loads_fan(text, "broken.json")
    assert str(e.value).startswith("broken.json:3:")


@pytest.mark.parametrize(
    "changes, match",
    [
        ({"coeffs": {"mode": "auto-heights", "q": -1}}, "positive"),
        ({"coeffs": {"mode": "nope"}}, "unknown coeffs mode"),
        ({"coeffs": {"mode": "explicit", "exponents": [[1]], "q": [0.1, 0.2]}}, "1 values of q"),
        ({"coeffs": {"mode": "explicit", "exponents": [[-1]], "q": [0.1]}}, "non-negative"),
        ({"triangles": [[2, 0, 1], [2, 1, 3]]}, "invalid triangulation"),
        ({"points": [[1, 0], [0, 1], [0, 0], [0.5, 1]]}, "integer"),
        ({"coeffs": {"mode": "terms", "values": [1, 1, 1, 0]}}, "non-zero"),
    ],
)
def test_invalid_documents(changes, match):
    with pytest.raises(FanFileError, match=match):
        loads_fan(_doc(**changes))


def test_missing_field():
    d = dict(LP2_DOC)
    del d["coeffs"]
    with pytest.raises(FanFileError, match="coeffs"):
        loads_fan(json.dumps(d))


def test_missing_file():
    with pytest.raises(FanFileError):
        parse_fan_file(FANS / "does-not-exist.json")


def test_fraction_strings_and_signs():
    text = _doc(coeffs={"mode": "auto-heights", "q": "1/64"}, signs=[1, 1, 1, 1])
    fan = loads_fan(text)
    assert fan.q.values == (1 / 64,)
    assert list(fan.polynomial.signs()) == [1, 1, 1, 1]
    assert not fan.polynomial.follows_sign_rule()


def test_round_trip(tmp_path):
    for path in sorted(FANS.glob("*.json")):
        fan = parse_fan_file(path)
        out = tmp_path / path.name
        write_fan_file(fan, out)
        again = parse_fan_file(out)
        assert again.triangulation == fan.triangulation
        assert again.polynomial == fan.polynomial
        assert again.q == fan.q
        assert dumps_fan(again) == out.read_text()


def test_report_format(tmp_path):
    rep = make_report("spine", "PASS", value=Fraction(1, 3), n=3, xs=(1.5, float("inf")))
    assert rep["version"] == REPORT_VERSION
    assert rep["value"] == "1/3"
    assert rep["xs"] == [1.5, "inf"]
    text = dumps_report(rep)
    assert text == dumps_report(json.loads(text))
    p = tmp_path / "r.json"
    p.write_text(text)
    assert load_report(p)["command"] == "spine"
    p.write_text("{}")
    with pytest.raises(ValueError):
        load_report(p)
