import math
import subprocess
import sys

import numpy as np
import pytest

from morleyoc.cli import EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, UsageError, main, parse_levels, read_config_file
from morleyoc.export import ERROR_COLUMNS, export_vtk, read_error_table, read_vtk_scalars
from morleyoc.assembly import FESpace
from morleyoc.mesh import build_disk_mesh, load_mesh
from morleyoc.pipeline import ConfigError, RunConfig

MAX_STATE = 0.25 + 0.5 * math.log(2.0)


def test_parse_levels():
    assert parse_levels("3") == [3]
    assert parse_levels("2:5") == [2, 3, 4, 5]
    for bad in ("5:2", "a", "1:x"):
        with pytest.raises(UsageError):
            parse_levels(bad)


def test_solve_level2(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["solve", "--levels", "2", "--out", str(out), "--log"]) == EXIT_OK
    rows = read_error_table(out / "errors.csv")
    assert len(rows) == 1
    for key in ("energy_err", "h1_err", "l2_err", "control_l2_err"):
        assert math.isfinite(float(rows[0][key]))
    assert (out / "solution.csv").exists() and (out / "uzawa_log.csv").exists()
    kkt = (out / "kkt.txt").read_text()
    assert "converged True" in kkt and "stationarity" in kkt
    assert "artifacts written" in capsys.readouterr().out


def test_unknown_problem_is_usage_error(tmp_path, capsys):
    assert main(["solve", "--problem", "no-such", "--out", str(tmp_path)]) == EXIT_USAGE
    err = capsys.readouterr().err
    assert "no-such" in err and "schiela-disk" in err


def test_bad_flag_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["solve", "--bogus"])
    assert exc.value.code == EXIT_USAGE


def test_single_level_convergence_is_usage_error(tmp_path):
    assert main(["convergence", "--levels", "2", "--out", str(tmp_path)]) == EXIT_USAGE


def test_unwritable_output_names_path(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    target = blocker / "sub"
    assert main(["solve", "--levels", "0", "--out", str(target)]) == EXIT_RUNTIME
    assert str(target) in capsys.readouterr().err


def test_missing_mesh_is_runtime_error(tmp_path, capsys):
    assert main(["solve", "--mesh", str(tmp_path / "none.tmesh"), "--out", str(tmp_path)]) == EXIT_RUNTIME
    assert "none.tmesh" in capsys.readouterr().err


def test_convergence_csv_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["convergence", "--levels", "0:2", "--out", str(d)]) == EXIT_OK
    assert (a / "convergence.csv").read_bytes() == (b / "convergence.csv").read_bytes()
    header = (a / "convergence.csv").read_text().splitlines()[0].split(",")
    assert header == ERROR_COLUMNS
    rows = read_error_table(a / "convergence.csv")
    assert [int(r["level"]) for r in rows] == [0, 1, 2]
    assert math.isnan(rows[0]["eoc_energy"])
    # 17 significant digits
    raw = (a / "convergence.csv").read_text().splitlines()[2].split(",")
    assert len(raw[3].replace(".", "").lstrip("0")) >= 15
    assert "finest-pair orders" in (a / "summary.txt").read_text()


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# study\nlevels = 0:1\ngmax = 0.5  # active bound\nrho = 2\nvtk = yes\n")
    kwargs = read_config_file(cfg)
    assert kwargs == {"levels": [0, 1], "g_max": 0.5, "rho": 2.0, "vtk": True}
    out = tmp_path / "o"
    assert main(["convergence", "--config", str(cfg), "--gmax", "1", "--out", str(out)]) == EXIT_OK
    assert "g_max 1" in (out / "summary.txt").read_text()
    assert (out / "solution_L1.vtk").exists()


def test_config_file_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = red\n")
    with pytest.raises(UsageError, match="unknown key"):
        read_config_file(bad)
    bad.write_text("beta = much\n")
    with pytest.raises(UsageError, match="line|bad value"):
        read_config_file(bad)
    assert main(["solve", "--config", str(tmp_path / "missing.cfg")]) == EXIT_USAGE


@pytest.mark.parametrize(
    "kw", [{"levels": []}, {"levels": [2, 1]}, {"levels": [-1]}, {"rho": 0.0}, {"tol": -1.0}, {"max_outer": 0}]
)
def test_run_config_validation(kw):
    with pytest.raises(ConfigError):
        RunConfig(**kw)


def test_zero_field_vtk(tmp_path):
    space = FESpace(build_disk_mesh(2.0, 1))
    nT = space.mesh.n_triangles
    z = np.zeros(nT)
    path = export_vtk(space, np.zeros(space.n_dofs), z, z, z, z, tmp_path / "zero")
    assert str(path).endswith("zero.vtk")
    text = open(path).read()
    assert text.startswith("# vtk DataFile Version")
    assert "DATASET UNSTRUCTURED_GRID" in text
    assert f"POINTS {space.mesh.n_vertices} double" in text
    assert f"CELL_TYPES {nT}" in text
    points, cells, pdata, cdata = read_vtk_scalars(path)
    assert set(pdata) == {"y_h"}
    assert set(cdata) == {"u_h", "mu", "lambda_plus", "lambda_minus"}
    for v in list(pdata.values()) + list(cdata.values()):
        assert np.all(v == 0.0)
    np.testing.assert_array_equal(cells, space.mesh.triangles)


def test_vtk_standard_reader(tmp_path):
    meshio = pytest.importorskip("meshio")
    space = FESpace(build_disk_mesh(2.0, 1))
    z = np.zeros(space.mesh.n_triangles)
    path = export_vtk(space, np.zeros(space.n_dofs), z, z, z, z, tmp_path / "zero.vtk")
    m = meshio.read(path)
    assert m.points.shape == (space.mesh.n_vertices, 3)
    assert m.cells_dict["triangle"].shape == (space.mesh.n_triangles, 3)
    assert np.all(m.point_data["y_h"] == 0.0)
    assert np.all(m.cell_data["mu"][0] == 0.0)


def test_export_solution_range(tmp_path):
    # with the active bound 1/2 the exact state solves the problem and
    # ranges over [0, MAX_STATE]; allow for the level-2 discretisation error
    out = tmp_path / "disk"
    assert main(["export", "--levels", "2", "--gmax", "0.5", "--rho", "10", "--out", str(out)]) == EXIT_OK
    pdata, cdata = read_vtk_scalars(str(out) + ".vtk")[2:]
    y = pdata["y_h"]
    assert y.min() >= -0.1 and y.max() <= MAX_STATE + 0.1
    assert y.max() > MAX_STATE - 0.1
    assert cdata["mu"].max() > 0.1


def test_export_gmax1_departs_from_exact_state(tmp_path):
    # with the bound 1 nothing is active and the discrete state tends to
    # the unconstrained minimiser, whose peak is near 1, not MAX_STATE
    out = tmp_path / "disk"
    assert main(["export", "--levels", "3", "--out", str(out)]) == EXIT_OK
    pdata, cdata = read_vtk_scalars(str(out) + ".vtk")[2:]
    assert pdata["y_h"].min() >= 0.0
    assert pdata["y_h"].max() > MAX_STATE + 0.3
    assert np.all(cdata["mu"] == 0.0)


def test_export_requires_out(capsys):
    assert main(["export", "--levels", "0"]) == EXIT_USAGE


def test_mesh_command(tmp_path):
    target = tmp_path / "m"
    assert main(["mesh", "--levels", "2", "--out", str(target)]) == EXIT_OK
    mesh = load_mesh(str(target) + ".tmesh")
    assert mesh.n_triangles == 8 * 16 and mesh.boundary_radius == 2.0


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "morleyoc", "mesh", "--levels", "0", "--out", str(tmp_path / "m.tmesh")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    proc = subprocess.run([sys.executable, "-m", "morleyoc", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for cmd in ("solve", "convergence", "export", "mesh"):
        assert cmd in proc.stdout
