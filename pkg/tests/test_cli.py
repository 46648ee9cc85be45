import json

import pytest
from click.testing import CliRunner

from hdx.cli import main
from hdx.io import load_complex


@pytest.fixture
def run(tmp_path):
    runner = CliRunner()

    def go(*args):
        args = [str(a) for a in args]
        res = runner.invoke(main, args, catch_exceptions=False)
        return res

    go.dir = tmp_path
    return go


def _read(path):
    with open(path) as fh:
        return json.load(fh)


def test_gen_complete_and_expansion(run):
    X = run.dir / "k5.json"
    assert run("gen", "complete", 5, 2, "-o", X).exit_code == 0
    assert load_complex(X).n_faces(2) == 10
    out = run.dir / "h.json"
    res = run("expansion", X, "--level", 1, "--target", "1", "-o", out)
    assert res.exit_code == 0 and res.output.startswith("expansion: PASS")
    data = _read(out)
    assert data["value_exact"] == "5/3"
    manifest = _read(str(out) + ".manifest.json")
    assert manifest["command"] == "expansion" and manifest["inputs"]


def test_expansion_failure_exit_code(run):
    X = run.dir / "k4.json"
    run("gen", "complete", 4, 2, "-o", X)
    # h^1 of the tetrahedron boundary over Z2 is 3: one flipped edge
    res = run("expansion", X, "--level", 1, "--target", "4", "-o", run.dir / "h.json")
    assert res.exit_code == 1 and "FAIL" in res.output


def test_input_errors_exit_two(run):
    X = run.dir / "k4.json"
    run("gen", "complete", 4, 2, "-o", X)
    res = run("gen", "restrict", X, "--colors", "0,1", "-o", run.dir / "r.json")
    assert res.exit_code == 2
    res = run("expansion", X, "--level", 1, "--group", "Q8", "-o", run.dir / "h.json")
    assert res.exit_code == 2
    res = run("expansion", X, "--method", "randomized", "-o", run.dir / "h.json")
    assert res.exit_code == 2


def test_building_spectral_and_restriction(run):
    B = run.dir / "sl3.json"
    assert run("gen", "building", 3, 2, "-o", B).exit_code == 0
    res = run("expansion", B, "--method", "spectral", "--target", "0.5", "-o", run.dir / "s.json")
    assert res.exit_code == 0
    assert _read(run.dir / "s.json")["value"] == pytest.approx(2**0.5 / 3)
    R = run.dir / "r.json"
    assert run("gen", "restrict", B, "--colors", "1", "-o", R).exit_code == 0
    assert load_complex(R).dimension == 0
    L = run.dir / "l.json"
    assert run("gen", "link", B, "--face", "0", "-o", L).exit_code == 0
    assert load_complex(L).n_faces(0) == 3


def test_lattice_and_order_complex(run):
    lat = run.dir / "b3.json"
    assert run("gen", "lattice", "boolean", 3, "-o", lat).exit_code == 0
    oc = run.dir / "oc.json"
    assert run("gen", "order-complex", lat, "-o", oc).exit_code == 0
    X = load_complex(oc)
    assert (X.n_faces(0), X.n_faces(1)) == (6, 6)


def test_cochain_correct_roundtrip(run):
    X = run.dir / "k6.json"
    run("gen", "complete", 6, 2, "-o", X)
    f = run.dir / "f.json"
    assert run("gen", "cochain", X, "--level", 1, "--group", "Z3", "--noise", "0.2", "--seed", 3, "-o", f).exit_code == 0
    out = run.dir / "c.json"
    res = run("correct", X, f, "--eta", "1/10", "-o", out)
    assert res.exit_code == 0, res.output
    data = _read(out)
    assert data["checks"]["contraction"] and data["checks"]["locally_minimal"]
    assert data["exhaustive"]


def test_cone_commands(run):
    out = run.dir / "cone.json"
    res = run("cone", "--building", 3, 2, "--colors", "1,2", "--level", 0, "-o", out)
    assert res.exit_code == 0, res.output
    data = _read(out)
    assert data["report"]["valid"] and data["report"]["radius"] == 3
    assert data["expansion_bound"] == "1/6" and data["radius_ok"]
    out = run.dir / "na.json"
    res = run("nacone", "--building", 4, 2, "--colors", "1,2,3", "-o", out)
    assert res.exit_code == 0
    assert _read(out)["report"]["diameter"] <= 9
    res = run("cone", "--building", 4, 2, "--colors", "2,3", "-o", run.dir / "bad.json")
    assert res.exit_code == 2


def test_decode_with_cone_certificate(run):
    B = run.dir / "sl4.json"
    run("gen", "building", 4, 2, "-o", B)
    f = run.dir / "f.json"
    run("gen", "cochain", B, "--level", 1, "--noise", "0.02", "--seed", 1, "-o", f)
    out = run.dir / "d.json"
    res = run("decode", B, f, "--certify", "nacone", "--F", "1,2,3", "-o", out)
    assert res.exit_code == 0, res.output
    data = _read(out)
    assert data["passed"] and data["beta"] == pytest.approx(1 / 9)
    assert data["disjunction_failures"] == 0


def test_upperbound_and_bounds(run):
    out = run.dir / "u.json"
    res = run("upperbound", "--complete", 7, 2, "--trials", 50, "--seed", 0, "-o", out)
    data = _read(out)
    assert res.exit_code == (0 if data["achieved"] else 1)
    assert 1 <= data["params"]["trials"] <= 50 and data["value"] <= data["target"]
    res = run("bounds", "--formula", "local-to-global", "--beta", 1, "--lambda", 0, "--k", 1)
    assert res.exit_code == 0 and "(1/24)" in res.output
    res = run("bounds", "--formula", "nacone", "--radius", 9, "--k-top", 2)
    assert "(1/9)" in res.output
    res = run("bounds", "--formula", "overlap", "--beta", 1)
    assert res.exit_code == 2


def test_same_seed_same_report(run):
    X = run.dir / "k6.json"
    run("gen", "complete", 6, 2, "-o", X)
    a, b = run.dir / "a.json", run.dir / "b.json"
    run("expansion", X, "--level", 1, "--method", "randomized", "--trials", 10, "--seed", 5, "-o", a)
    run("expansion", X, "--level", 1, "--method", "randomized", "--trials", 10, "--seed", 5, "-o", b)
    assert _read(a) == _read(b)
    f1, f2 = run.dir / "f1.json", run.dir / "f2.json"
    run("gen", "cochain", X, "--level", 1, "--noise", "0.1", "--seed", 9, "-o", f1)
    run("gen", "cochain", X, "--level", 1, "--noise", "0.1", "--seed", 9, "-o", f2)
    assert _read(f1) == _read(f2)
