import csv
import json

import numpy as np
import pytest

from shellbar import cli, io
from shellbar.benchmarks import StudyResult, case_to_config, get_case, run_case

HEADER = "case,method,degree,mesh,thickness,monitor,normalized,rel_error,rank,seconds"


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_run_writes_one_row(tmp_path, capsys):
    out = tmp_path / "r.csv"
    code = cli.main(["run", "--case", "plate", "--method", "glb", "--degree", "2", "--mesh", "8",
                     "--thickness", "1e-5", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == HEADER and len(lines) == 2
    row = _rows(out)[0]
    assert row["case"] == "plate" and row["mesh"] == "8" and float(row["thickness"]) == 1e-5
    assert abs(float(row["normalized"]) - 1) < 0.01
    assert "normalized=" in capsys.readouterr().out


def test_sweep_row_count_and_order(tmp_path):
    out = tmp_path / "conv.csv"
    code = cli.main(["sweep", "--case", "scordelis", "--methods", "iga,glb", "--meshes", "2,4,8,16", "--out", str(out)])
    assert code == 0
    rows = _rows(out)
    assert len(rows) == 8
    assert [(r["method"], int(r["mesh"])) for r in rows] == sorted((r["method"], int(r["mesh"])) for r in rows)


def test_demo_timoshenko(capsys):
    assert cli.main(["demo", "timoshenko"]) == 0
    out = capsys.readouterr().out.split()
    assert out[-4:] == ["-1", "+1", "-0.5", "-0.5"]


def test_demo_cases(capsys):
    assert cli.main(["demo", "cases"]) == 0
    assert "scordelis" in capsys.readouterr().out


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--case", "dome"],
        ["run", "--case", "plate", "--bogus"],
        ["run"],
        ["run", "--case", "plate", "--config", "x.json"],
        ["run", "--case", "plate", "--method", "sri"],
        ["fly"],
        ["run", "--case", "plate", "--distort-stage", "0.5"],
        ["run", "--case", "plate", "--thickness", "-1"],
        ["sweep", "--case", "plate", "--methods", "iga,sri"],
    ],
)
def test_usage_and_config_errors_exit_1(argv, capsys):
    assert cli.main(argv) == 1


def test_bad_config_file_exits_1(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"degree": [2, 2]}))
    assert cli.main(["run", "--config", str(p)]) == 1
    assert cli.main(["run", "--config", str(tmp_path / "missing.json")]) == 1


def test_numerical_failure_exits_2(tmp_path):
    doc = case_to_config(get_case("scordelis"))
    doc["bcs"] = []
    p = tmp_path / "free.json"
    p.write_text(json.dumps(doc))
    assert cli.main(["run", "--config", str(p), "--mesh", "2"]) == 2
    # too coarse for the distortion: recorded per row, sweep reports failure
    assert cli.main(["sweep", "--case", "plate", "--meshes", "1", "--methods", "iga",
                     "--distort-mode", "expansion", "--distort-stage", "0.5"]) == 2
    assert cli.main(["run", "--case", "plate", "--mesh", "1", "--distort-mode", "expansion",
                     "--distort-stage", "0.5"]) == 2


def test_config_round_trip_through_cli(tmp_path):
    p = tmp_path / "roof.json"
    p.write_text(json.dumps(case_to_config(get_case("scordelis"))))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(["run", "--config", str(p), "--mesh", "4", "--out", str(a)]) == 0
    assert cli.main(["run", "--case", "scordelis", "--mesh", "4", "--out", str(b)]) == 0
    ra, rb = _rows(a)[0], _rows(b)[0]
    assert ra["monitor"] == rb["monitor"] and ra["case"] == "scordelis"


def test_field_export_counts_and_format_equivalence(tmp_path):
    vtk, csvp = tmp_path / "f.vtk", tmp_path / "f.csv"
    assert cli.main(["field", "--case", "scordelis", "--mesh", "4", "--density", "1", "--out", str(vtk)]) == 0
    assert cli.main(["field", "--case", "scordelis", "--mesh", "4", "--density", "1", "--format", "csv",
                     "--out", str(csvp)]) == 0
    text = vtk.read_text().splitlines()
    assert text[0] == "# vtk DataFile Version 3.0" and "DIMENSIONS 4 4 1" in text
    rows = _rows(csvp)
    assert len(rows) == 16
    start = text.index("POINTS 16 double") + 1
    vtk_points = [tuple(float(x) for x in line.split()) for line in text[start:start + 16]]
    assert vtk_points == [(float(r["x"]), float(r["y"]), float(r["z"])) for r in rows]
    w_at = text.index("SCALARS w double 1") + 2
    assert [float(x) for x in text[w_at:w_at + 16]] == [float(r["w"]) for r in rows]


def test_field_export_is_deterministic(tmp_path):
    args = ["field", "--case", "cylinder", "--mesh", "4", "--density", "3"]
    a, b = tmp_path / "a.vtk", tmp_path / "b.vtk"
    assert cli.main(args + ["--out", str(a)]) == 0
    assert cli.main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_roof_field_extremum_on_free_edge_midspan(tmp_path):
    r, model, u = run_case(get_case("scordelis"), "glb", 2, 8, return_solution=True)
    f = io.sample_field(u, model, 2)
    nx, ny = f.dims
    w = f.values[:, 2].reshape(ny, nx)
    j, i = np.unravel_index(np.argmin(w), w.shape)
    # monitor sits at xi = 1 (free edge), eta = 1 (midspan symmetry line)
    assert i == nx - 1 and j == ny - 1


def test_field_density_validation(tmp_path):
    r, model, u = run_case(get_case("plate"), "glb", 2, 2, return_solution=True)
    with pytest.raises(ValueError):
        io.export_field(u, model, 0, tmp_path / "x.vtk")
    with pytest.raises(ValueError):
        io.export_field(u, model, 1, tmp_path / "x.txt", "txt")
    f = io.sample_field(u, model, 2, deformed=True)
    assert f.points.shape == (16, 3) and f.slots == ("u", "v", "w", "rx", "ry")


def test_unwritable_path_raises(tmp_path):
    r, model, u = run_case(get_case("plate"), "glb", 2, 2, return_solution=True)
    with pytest.raises(OSError):
        io.export_field(u, model, 1, tmp_path / "missing" / "x.vtk")


def test_write_results_sorted_and_byte_identical(tmp_path):
    rs = [StudyResult("plate", "glb", 2, m, 1e-3, -1.0 * m, 1.0, 0.0, None, 0.5) for m in (16, 4, 8)]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    io.write_results(rs, a)
    io.write_results(list(reversed(rs)), b)
    assert a.read_bytes() == b.read_bytes()
    assert [r.mesh for r in io.read_results(a)] == [4, 8, 16]
    with pytest.raises(ValueError):
        io.write_results([], a)


def test_single_result_file_has_two_lines(tmp_path):
    r = run_case(get_case("scordelis"), "glb", 2, 2, rank=True)
    p = io.write_results([r], tmp_path / "one.csv")
    lines = p.read_text().splitlines()
    assert len(lines) == 2 and lines[0] == HEADER
    assert io.read_results(p)[0].rank == r.rank
