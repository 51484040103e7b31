import pandas as pd
import pytest

from cosseratshell.bench import cli
from cosseratshell.bench.outputs import CSV_COLUMNS, LoadDeflectionRecorder, emit_deformed_geometry
from cosseratshell.errors import ConvergenceError, ScenarioError, SingularSystemError


def run_tiny(write_scenario, out, *extra):
    return cli.main(["run", str(write_scenario()), "--out", str(out), "--quiet", *extra])


def test_list_prints_bundled_benchmarks(capsys):
    assert cli.main(["list"]) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "rollup_2pi" in out
    assert "gripper" in out
    assert len(out.splitlines()) == 21


def test_missing_file_exits_with_scenario_code(tmp_path):
    assert cli.main(["run", str(tmp_path / "missing.cfg"), "--quiet"]) == cli.EXIT_SCENARIO


def test_invalid_file_exits_with_scenario_code(write_scenario, tiny_text, tmp_path):
    path = write_scenario(tiny_text.replace("nx = 6", "nx = 0"))
    code = cli.main(["run", str(path), "--out", str(tmp_path / "out"), "--quiet"])
    assert code == cli.EXIT_SCENARIO


def test_unknown_benchmark(tmp_path):
    assert cli.main(["bench", "no_such_case", "--out", str(tmp_path), "--quiet"]) == cli.EXIT_SCENARIO


def test_run_writes_artifacts(write_scenario, tmp_path):
    assert run_tiny(write_scenario, tmp_path) == cli.EXIT_OK
    out = tmp_path / "tiny"
    frame = pd.read_csv(out / "load_deflection.csv")
    assert list(frame.columns) == CSV_COLUMNS
    assert len(frame) == 4
    assert frame["load"].is_monotonic_increasing
    assert frame["load"].iloc[-1] == pytest.approx(0.01)
    assert frame["iterations"].iloc[0] == 0
    assert (frame["iterations"].iloc[1:] >= 1).all()
    # M L / EI with EI = E w h^3 / 12
    assert frame["tip_rotation"].iloc[-1] == pytest.approx(1.2, rel=0.01)
    assert "converged" in (out / "report.txt").read_text()
    assert (out / "report.log").exists()
    assert [p.name for p in (out / "mesh").iterdir()] == ["step_0003.txt"]


def test_runs_are_deterministic(write_scenario, tmp_path):
    run_tiny(write_scenario, tmp_path / "a")
    run_tiny(write_scenario, tmp_path / "b")
    first = (tmp_path / "a" / "tiny" / "load_deflection.csv").read_text()
    assert first == (tmp_path / "b" / "tiny" / "load_deflection.csv").read_text()


def test_steps_override(write_scenario, tmp_path):
    assert run_tiny(write_scenario, tmp_path, "--steps", "5") == cli.EXIT_OK
    assert len(pd.read_csv(tmp_path / "tiny" / "load_deflection.csv")) == 6


def test_solver_failure_exits_with_solver_code(write_scenario, tmp_path):
    assert run_tiny(write_scenario, tmp_path, "--max-iter", "1") == cli.EXIT_SOLVER
    out = tmp_path / "tiny"
    assert len(pd.read_csv(out / "load_deflection.csv")) == 1
    assert "failed" in (out / "report.txt").read_text()


def test_output_directory_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("COSSERATSHELL_OUT", str(tmp_path / "env"))
    args = cli.parse_args(["bench", "rollup_2pi"])
    assert args.out == str(tmp_path / "env")
    assert args.jobs == 1


def test_exit_code_mapping():
    assert cli._exit_code(ScenarioError("bad")) == cli.EXIT_SCENARIO
    assert cli._exit_code(FileNotFoundError()) == cli.EXIT_SCENARIO
    assert cli._exit_code(ConvergenceError("stuck")) == cli.EXIT_SOLVER
    assert cli._exit_code(SingularSystemError("zero pivot")) == cli.EXIT_SOLVER
    with pytest.raises(KeyError):
        cli._exit_code(KeyError("other"))


def test_deformed_geometry_has_triangles(plate_mesh, tmp_path):
    mesh = plate_mesh(nx=2, ny=1)
    lines = emit_deformed_geometry(mesh, tmp_path / "geometry.txt").read_text().splitlines()
    start = lines.index("# triangles 4")
    assert lines[start + 1].split() == ["0", "0", "1", "4"]
    assert lines[start + 3].split() == ["2", "0", "4", "3"]
    assert len(lines) == start + 5


def test_recorder_rows(plate_mesh, tmp_path):
    mesh = plate_mesh(nx=2, ny=1)
    recorder = LoadDeflectionRecorder(10.0, tmp_path / "mesh", dumps="all", load_steps=2)
    recorder(0, 0.0, mesh, None)
    recorder(1, 0.5, mesh, None)
    frame = recorder.to_frame()
    assert frame["load"].tolist() == [0.0, 5.0]
    assert frame["tip_rotation"].tolist() == [0.0, 0.0]
    assert len(recorder.mesh_dumps) == 2


def test_bench_all_runs_every_registered_scenario(write_scenario, tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "bundled_scenarios", lambda: {"tiny": write_scenario()})
    assert cli.bench_all(tmp_path, jobs=1, quiet=True) == cli.EXIT_OK
    assert (tmp_path / "tiny" / "load_deflection.csv").exists()
    assert (tmp_path / "tiny" / "report.txt").read_text().splitlines()[-1].startswith("# converged")


def test_bench_all_reports_worst_exit_code(write_scenario, tiny_text, tmp_path, monkeypatch):
    text = tiny_text.replace("name = tiny", "name = broken").replace("load_steps = 3", "load_steps = 3\nmax_iters = 1")
    broken = write_scenario(text, "broken.cfg")
    monkeypatch.setattr(cli, "bundled_scenarios", lambda: {"tiny": write_scenario(), "broken": broken})
    assert cli.bench_all(tmp_path, jobs=1, quiet=True) == cli.EXIT_SOLVER
