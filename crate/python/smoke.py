"""Smoke test for the `endline` extension module.

Build and install first:

    cd crates/py && maturin build --release -o dist && pip install dist/endline-*.whl
"""

import math
import pathlib

import endline

ROOT = pathlib.Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"


def check_fixtures():
    for path in sorted((FIXTURES / "classify").glob("*.jet")):
        expect = path.read_text().splitlines()[0].split(":", 1)[1].strip()
        got = endline.Jet.load(path).classify(1e-9).verdict
        assert got == expect, f"{path.name}: {got} != {expect}"


def check_jet_api():
    jet = endline.Jet.from_coefficients("regular", b=1.0, a30=1.0)
    assert jet.chart == "regular"
    assert jet.coefficients == {"a30": 1.0, "b": 1.0}
    assert jet.classify().verdict == "InflexionElliptic"
    assert endline.Jet.parse(jet.to_text()).to_text() == jet.to_text()

    l, m, n = jet.bde(0.1, 0.2)
    assert all(math.isfinite(x) for x in (l, m, n))

    leaf = jet.trace(0.3, 0.4, "maximal")
    assert len(leaf) > 10
    csv = jet.trace_csv(0.3, 0.4, "minimal").splitlines()
    assert csv[0] == "u,w,foliation_id" and csv[1].endswith(",0")

    svg = jet.portrait_svg(seed_grid=5)
    assert svg.count('class="singular-point"') == 1


def check_errors():
    try:
        endline.Jet.parse("schema_version = 1\nchart = regular\nbogus = 1\n")
    except endline.EndlineError as e:
        assert "line 3" in str(e)
    else:
        raise AssertionError("bad key accepted")
    saddle = endline.Jet.from_coefficients("critical-saddle", a=1.0, a30=1.0)
    try:
        saddle.return_map()
    except endline.EndlineError:
        pass
    else:
        raise AssertionError("return map on a saddle jet")


def check_return_map_and_verify():
    rm = endline.Jet.load(FIXTURES / "returnmap" / "random.jet").return_map(steps=2048)
    assert len(rm.q) == 4 and max(abs(q) for q in rm.q[:3]) < 1e-7
    assert math.isclose(rm.delta, sum(v for _, v in rm.delta_terms), rel_tol=1e-12)

    passed, checks = endline.verify("polar", trials=3, seed=1)
    assert passed, checks
    assert "coeffs" in endline.SUITES


if __name__ == "__main__":
    check_fixtures()
    check_jet_api()
    check_errors()
    check_return_map_and_verify()
    print("smoke ok")
