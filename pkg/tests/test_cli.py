import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from horoduality.cli import UsageError, main, parse_function, parse_point, parse_ray, parse_tangent
from horoduality.geometry import space_from_name


def _run(argv, capsys=None):
    code = main(argv)
    out = capsys.readouterr().out if capsys is not None else None
    return code, out


def _drop_runtime(text):
    data = json.loads(text)
    data["summary"].pop("runtime_ms")
    return data


# -- literals -----------------------------------------------------------------------------
def test_parse_points():
    h2 = space_from_name("h2")
    np.testing.assert_allclose(parse_point(h2, "polar:0,0"), [0, 0, 1])
    np.testing.assert_allclose(parse_point(h2, "ambient:0,0,1"), [0, 0, 1])
    np.testing.assert_allclose(parse_point(space_from_name("spd2"), "2,0,1"), np.diag([2.0, 1.0]))
    assert parse_point(space_from_name("h2xr"), "origin").shape == (4,)
    np.testing.assert_allclose(parse_point(space_from_name("e2"), "3,4"), [3, 4])


@pytest.mark.parametrize("name,text", [("e2", "1"), ("h2", "ambient:1,0,0"), ("spd2", "1,0,-1"),
                                       ("h2", "polar:1"), ("e2", "a,b")])
def test_parse_point_rejects(name, text):
    with pytest.raises((UsageError, ValueError)):
        parse_point(space_from_name(name), text)


def test_parse_tangent_basis_coordinates():
    h2 = space_from_name("h2")
    o = h2.origin()
    np.testing.assert_allclose(parse_tangent(h2, o, "1,0"), [1, 0, 0])


def test_parse_ray_and_functions():
    h2 = space_from_name("h2")
    r = parse_ray(h2, "polar:0,0:1,0")
    np.testing.assert_allclose(r.dir, [1, 0, 0])
    o = h2.origin()
    for spec in ["radial:quadratic:1.0", "radial:power:3", "radial:linear:1", "radial:expm1",
                 "busemann:polar:0,0:1,0", "halfdistsq", "gram:polar:0,0:polar:1,0"]:
        assert parse_function(h2, spec, o) is not None
    with pytest.raises(UsageError):
        parse_function(h2, "logdet", o)
    with pytest.raises(UsageError):
        parse_function(h2, "cubic:2", o)


# -- verify --------------------------------------------------------------------------------
def test_verify_h2_duality(tmp_path):
    out = tmp_path / "r.json"
    assert main(["verify", "--space", "h2", "--suite", "duality", "--seed", "42", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["suite"] == "duality" and data["space"] == "h2" and data["seed"] == 42
    case = next(c for c in data["cases"] if c["name"] == "nonlinearity_unit_distance")
    assert case["expected"] == pytest.approx(-0.120115, abs=1e-6)
    assert case["pass"]
    assert data["summary"]["failed"] == 0
    assert data["summary"]["passed"] == len(data["cases"])


def test_verify_e2_all(capsys):
    code, out = _run(["verify", "--space", "e2", "--suite", "all"], capsys)
    assert code == 0
    names = [c["name"] for c in json.loads(out)["cases"]]
    assert names == sorted(names)
    assert {n.split("/")[0] for n in names} == {"geometry", "horoball", "duality", "subgradient",
                                                 "rigidity", "isometry"}


def test_verify_deterministic(capsys):
    argv = ["verify", "--space", "h2", "--suite", "horoball", "--seed", "3"]
    _, a = _run(argv, capsys)
    _, b = _run(argv, capsys)
    assert _drop_runtime(a) == _drop_runtime(b)


def test_verify_csv(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["verify", "--space", "e2", "--suite", "geometry", "--out", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["name", "expected", "actual", "tol", "pass"]
    assert all(r[4] == "true" for r in rows[1:])


# -- computations -----------------------------------------------------------------------------
def test_conjugate_grid(capsys):
    code, out = _run(["conjugate", "--space", "h2", "--fn", "radial:quadratic:1.0",
                      "--p", "polar:0,0", "--grid", "16"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 256
    assert set(rows[0]) == {"r", "theta", "conjugate", "radial_oracle", "abs_diff"}
    assert max(float(r["abs_diff"]) for r in rows) <= 1e-3


def test_conjugate_points_file(tmp_path, capsys):
    pts = tmp_path / "pts.txt"
    pts.write_text("# points\n1,0\n0.5,-2\n")
    code, out = _run(["conjugate", "--space", "e2", "--fn", "halfdistsq", "--p", "0,0",
                      "--points", str(pts)], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [float(r["conjugate"]) for r in rows] == pytest.approx([0.5, 2.125], abs=1e-9)


def test_nonlinearity_command(capsys):
    code, out = _run(["nonlinearity", "--space", "h2", "--k", "1", "--radius", "1"], capsys)
    assert code == 0
    data = json.loads(out)
    assert all(c["expected"] == pytest.approx(-0.120115, abs=1e-6) for c in data["cases"])


def test_curvature_command(capsys):
    code, out = _run(["curvature", "--space", "h2xr", "--point", "origin"], capsys)
    assert code == 0
    cases = {c["name"]: c for c in json.loads(out)["cases"]}
    assert cases["min_abs_ricci"]["actual"] == pytest.approx(0.0, abs=1e-9)


def test_busemann_levels(tmp_path):
    out = tmp_path / "lv.csv"
    assert main(["busemann-levels", "--space", "h2", "--ray", "polar:0,0:1,0", "--grid", "8",
                 "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert set(rows[0]) == {"u", "v", "busemann"}
    assert 0 < len(rows) <= 64


def test_subdiff_exit_codes(capsys):
    base = ["subdiff", "--space", "e2", "--fn", "halfdistsq", "--p", "0,0", "--x", "1,0",
            "--budget", "n_samples=200"]
    assert _run(base + ["--v", "1,0"], capsys)[0] == 0
    assert _run(base + ["--v", "2,0"], capsys)[0] == 1


# -- usage errors --------------------------------------------------------------------------
@pytest.mark.parametrize("argv", [
    ["verify", "--space", "h5", "--suite", "all"],
    ["conjugate", "--space", "h2", "--fn", "nonsense", "--p", "polar:0,0", "--grid", "4"],
    ["conjugate", "--space", "h2", "--fn", "halfdistsq", "--p", "polar:0", "--grid", "4"],
    ["conjugate", "--space", "h2", "--fn", "halfdistsq", "--p", "polar:0,0", "--grid", "4",
     "--budget", "bogus=1"],
    ["conjugate", "--space", "e2", "--fn", "halfdistsq", "--p", "0,0", "--points", "/nonexistent"],
    ["curvature", "--space", "moon"],
    [],
])
def test_usage_errors_exit_2(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 2


def test_unwritable_output_exit_2():
    assert main(["verify", "--space", "e2", "--suite", "geometry", "--out", "/nonexistent/dir/r.json"]) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "horoduality", "curvature", "--space", "h2"],
                          capture_output=True, text=True, cwd=tmp_path)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["space"] == "h2"
