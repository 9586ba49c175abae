import json
import logging
import math
import subprocess
import sys

import numpy as np
import pytest

from cellarea import io
from cellarea.cli import RunConfig, main, run
from cellarea.errors import DegenerateInput, ParseError
from cellarea.polyhedron import metrics, tangent_polytope
from cellarea.solids import cube_normals, fcc_normals

from conftest import random_unit_ball_cell

CUBE_HS = [[1, 0, 0, 1], [-1, 0, 0, 1], [0, 1, 0, 1], [0, -1, 0, 1], [0, 0, 1, 1], [0, 0, -1, 1]]
FLAT_HS = [[1, 0, 0, 2], [-1, 0, 0, 2], [0, 1, 0, 2], [0, -1, 0, 2], [0, 0, 1, 0.5], [0, 0, -1, 0.5]]


def metric_tuple(P):
    m = metrics(P)
    return np.array([m.sarea, m.vol, m.ecurv, m.total_edge_length, m.inradius, m.diameter])


@pytest.fixture
def cube_json(tmp_path):
    path = tmp_path / "cube.json"
    path.write_text(json.dumps({"halfspaces": CUBE_HS}))
    return path


def test_parse_cube_halfspaces(cube_json):
    P = io.parse_polyhedron(cube_json)
    assert metrics(P).sarea == pytest.approx(24.0)
    assert P.n_faces == 6


def test_parse_cube_from_off_vertices(tmp_path):
    path = tmp_path / "cube.off"
    verts = [[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)]
    path.write_text("OFF\n8 0 0\n" + "\n".join(" ".join(map(str, v)) for v in verts) + "\n")
    P = io.parse_polyhedron(path)
    assert np.allclose(metric_tuple(P), metric_tuple(tangent_polytope(cube_normals())), rtol=1e-12)


def test_non_unit_normal_is_normalized_with_warning(caplog):
    with caplog.at_level(logging.WARNING, logger="cellarea.io"):
        (h,) = io.halfspaces_from_rows([[2, 0, 0, 2]])
    assert h.normal == (1.0, 0.0, 0.0) and h.offset == 1.0
    assert "normalised" in caplog.text


@pytest.mark.parametrize(
    "text",
    ["{not json", '{"halfspaces": [[1, 0, 0]]}', '{"halfspaces": [[0, 0, 0, 1]]}', '{"foo": 1}', '[[1, "a", 0, 1]]'],
)
def test_malformed_json(tmp_path, text):
    path = tmp_path / "bad.json"
    path.write_text(text)
    with pytest.raises(ParseError):
        io.parse_polyhedron(path)


def test_malformed_off_and_missing_file(tmp_path):
    path = tmp_path / "bad.off"
    path.write_text("OFF\n8 0 0\n1 2 3\n")
    with pytest.raises(ParseError):
        io.parse_polyhedron(path)
    with pytest.raises(ParseError):
        io.parse_polyhedron(tmp_path / "missing.json")


def test_coplanar_vertices_rejected(tmp_path):
    path = tmp_path / "flat.json"
    path.write_text(json.dumps({"vertices": [[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]]}))
    with pytest.raises(DegenerateInput):
        io.parse_polyhedron(path)


def test_roundtrips(tmp_path, rng):
    for i in range(10):
        P = random_unit_ball_cell(rng)
        ref = metric_tuple(P)
        j = tmp_path / f"p{i}.json"
        j.write_text(io.dumps(io.polyhedron_to_json(P)))
        assert np.allclose(metric_tuple(io.parse_polyhedron(j)), ref, rtol=1e-12, atol=0)
        # halfspace-only and vertex-only documents both reproduce the cell
        data = io.polyhedron_to_json(P)
        assert np.allclose(metric_tuple(io.polyhedron_from_json({"vertices": data["vertices"]})), ref, rtol=1e-12)
        o = tmp_path / f"p{i}.off"
        io.write_off(P, o)
        assert np.allclose(metric_tuple(io.parse_polyhedron(o)), ref, rtol=1e-12)


def test_off_layout(tmp_path):
    P = tangent_polytope(fcc_normals())
    path = tmp_path / "rd.off"
    io.write_off(P, path)
    verts, faces = io.read_off(path)
    assert path.read_text().startswith("OFF\n14 ")
    assert len(verts) == 14 and all(len(f) == 3 for f in faces)
    # triangles are counterclockwise from outside: signed volume is positive
    vol = sum(np.dot(verts[a], np.cross(verts[b], verts[c])) for a, b, c in faces) / 6.0
    assert vol == pytest.approx(4 * math.sqrt(2))


def test_dumps_is_deterministic_and_strict():
    doc = {"a": float("inf"), "b": np.float64(0.1), "c": np.arange(2)}
    assert io.dumps(doc) == io.dumps(doc)
    assert json.loads(io.dumps(doc)) == {"a": None, "b": 0.1, "c": [0, 1]}


# --------------------------------------------------------------------------
# CLI


def test_cell_certify_cube_passes(cube_json, tmp_path):
    out = tmp_path / "r.json"
    lines = tmp_path / "r.jsonl"
    code = main(["cell-certify", str(cube_json), "-o", str(out), "--jsonl", str(lines)])
    assert code == 0
    rep = json.loads(out.read_text())
    main_four = [c for c in rep["certificates"] if c["name"] != "jung-area-bound"]
    assert len(main_four) == 4 and all(c["pass"] for c in main_four)
    assert len(lines.read_text().splitlines()) == 5


def test_cell_certify_flat_box_exit_2(tmp_path):
    path = tmp_path / "flat.json"
    path.write_text(json.dumps({"halfspaces": FLAT_HS}))
    out = tmp_path / "r.json"
    assert main(["cell-certify", str(path), "-o", str(out)]) == 2
    rep = json.loads(out.read_text())
    assert any(c.get("error") == "PreconditionViolated" for c in rep["certificates"])
    assert rep["all_pass"] is False


def test_cell_metrics_and_off_output(cube_json, tmp_path):
    out, off = tmp_path / "m.json", tmp_path / "m.off"
    assert main(["cell-metrics", str(cube_json), "-o", str(out), "--off", str(off)]) == 0
    assert json.loads(out.read_text())["metrics"]["sarea"] == pytest.approx(24.0)
    assert metrics(io.parse_polyhedron(off)).vol == pytest.approx(8.0)


def test_input_errors_exit_1(tmp_path, capsys):
    assert main(["cell-metrics", str(tmp_path / "missing.json")]) == 1
    assert main(["tiling-report", "--preset", "nope"]) == 1
    assert run(RunConfig("optimize", N=3)) == 1
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 1


def test_tiling_series_fcc(tmp_path):
    out = tmp_path / "s.json"
    assert main(["tiling-series", "--preset", "FCC", "--Ls", "10,20,40", "-o", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert len(rep["windows"]) == 3
    assert rep["summary"]["min_average_sarea"] >= 13.8564


def test_tiling_report_off_export(tmp_path):
    off = tmp_path / "w.off"
    assert main(["tiling-report", "--preset", "SC", "-L", "6", "--off", str(off), "-o", str(tmp_path / "w.json")]) == 0
    verts, faces = io.read_off(off)
    assert len(faces) == 27 * 12


def test_tolerance_flag_can_fail_a_run(cube_json, tmp_path):
    # a negative tolerance is rejected as invalid input rather than silently accepted
    assert main(["cell-certify", str(cube_json), "--tol", "-1", "-o", str(tmp_path / "x.json")]) == 1


def test_reports_are_byte_identical(tmp_path):
    out = tmp_path / "o.json"
    args = ["optimize", "-N", "6", "--restarts", "2", "--seed", "5", "--max-iter", "500", "-o", str(out)]
    assert main(args) == 0
    first = out.read_bytes()
    assert main(args) == 0
    assert out.read_bytes() == first
    rep = json.loads(first)
    assert rep["reference"]["rhombic_dodecahedron"] == pytest.approx(16.9706, abs=1e-4)


def test_module_entry_point(cube_json):
    proc = subprocess.run([sys.executable, "-m", "cellarea", "cell-metrics", str(cube_json)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["metrics"]["vol"] == pytest.approx(8.0)
