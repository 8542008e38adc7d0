import csv
import json

import jsonschema
import pytest

from electroskeleton import io
from electroskeleton.cli import build_parser, main

EQ = "0,0,1,0,0.5,0.8660254037844386"
FAST = ["--panels", "32", "--grid", "128", "--arc-samples", "64"]



def test_help_lists_exit_codes(capsys):
    with pytest.raises(SystemExit):
        build_parser().parse_args(["--help"])
    out = capsys.readouterr().out
    assert "exit codes" in out and "non-convex polygon" in out and "20" in out


def test_compute_bundle_validates_and_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["compute", "--vertices", EQ, *FAST, "--out", str(a), "--csv", str(tmp_path / "eq")]) == 0
    assert main(["compute", "--vertices", EQ, *FAST, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    data = json.loads(a.read_text())
    jsonschema.validate(data, io.load_schema("bundle"))
    assert len(data["skeleton"]["arcs"]) == 3 and len(data["skeleton"]["junctions"]) == 1
    assert abs(data["summary"]["mass"] - 1) < 5e-3
    with open(tmp_path / "eq_measure.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == len(data["measure"]["samples"])
    assert all(float(r["density"]) > 0 for r in rows)
    with open(tmp_path / "eq_ridges.csv") as fh:
        assert next(csv.reader(fh)) == ["arc", "pair", "x", "y"]


def test_input_file(tmp_path):
    src = tmp_path / "sq.json"
    src.write_text(json.dumps({"vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]}))
    out = tmp_path / "sq_out.json"
    assert main(["compute", "--input", str(src), *FAST, "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert len(data["skeleton"]["arcs"]) == 4


def test_nonconvex_exit_code(capsys):
    code = main(["compute", "--vertices", "0,0,2,0,1,0.2,1,1,0,1"])
    err = capsys.readouterr().err
    assert code == 3
    assert "NonConvex" in err and "non-convex polygon has no electrostatic skeleton" in err


def test_degenerate_and_usage_errors(capsys):
    assert main(["compute", "--vertices", "0,0,1,0,2,0"]) == 4
    assert main(["compute", "--vertices", "0,0,1,0,2"]) == 64
    assert main(["compute", "--vertices", EQ, "--tol", "nonsense=1"]) == 64


def test_verify_and_negative_control(tmp_path):
    ok, bad = tmp_path / "ok.json", tmp_path / "bad.json"
    assert main(["verify", "--vertices", EQ, "--out", str(ok)]) == 0
    assert main(["verify", "--vertices", EQ, "--perturb", "--out", str(bad)]) == 20
    schema = io.load_schema("verify")
    for p in (ok, bad):
        jsonschema.validate(json.loads(p.read_text()), schema)
    assert json.loads(bad.read_text())["checks"]["exterior_match"] is False


def test_tolerance_override_flips_verdict(tmp_path):
    out = tmp_path / "v.json"
    assert main(["verify", "--vertices", EQ, *FAST, "--tol", "match_sup=1e-9", "--out", str(out)]) == 20
    assert json.loads(out.read_text())["config"]["tolerances"]["match_sup"] == 1e-9


def test_conjecture_rejects_triangles():
    assert main(["conjecture", "--sides", "3", "--trials", "1"]) == 2


def test_conjecture_report(tmp_path):
    a, b = tmp_path / "c1.json", tmp_path / "c2.json"
    argv = ["conjecture", "--sides", "4", "--trials", "2", "--seed", "11", *FAST]
    assert main(argv + ["--out", str(a)]) == 0
    assert main(argv + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    data = json.loads(a.read_text())
    jsonschema.validate(data, io.load_schema("conjecture"))
    assert data["summary"]["runs"] == 3
    assert data["instances"][0]["kind"] == "regular"


def test_vertex_parsing(tmp_path):
    assert io.parse_vertex_list("0,0, 1,0;0,1") == [[0, 0], [1, 0], [0, 1]]
    with pytest.raises(ValueError):
        io.parse_vertex_list("1,2,3")
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    with pytest.raises(ValueError):
        io.load_vertices(bad)


def test_schemas_load():
    for name in io.SCHEMAS:
        jsonschema.Draft202012Validator.check_schema(io.load_schema(name))
    with pytest.raises(KeyError):
        io.load_schema("other")


def test_atomic_write_replaces(tmp_path):
    p = tmp_path / "x.json"
    io.write_atomic(p, "one")
    io.write_atomic(p, "two")
    assert p.read_text() == "two"
    assert [f.name for f in tmp_path.iterdir()] == ["x.json"]
