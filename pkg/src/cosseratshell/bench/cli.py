"""Command-line driver for scenario runs and the bundled benchmark suite.

    cosseratshell run path/to/scenario.cfg
    cosseratshell bench rollup_2pi
    cosseratshell bench all --jobs 4
    cosseratshell list

Exit codes: 0 converged, 2 scenario or file error, 3 solver failure.
"""

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path
from typing import List, Optional, Tuple

from dotenv import load_dotenv
from tqdm import tqdm

from cosseratshell.bench.calibration import calibrate_loads
from cosseratshell.bench.outputs import LoadDeflectionRecorder, RunOutputs
from cosseratshell.bench.scenario import (
    ScenarioConfig,
    build_problem,
    bundled_scenarios,
    parse_scenario,
    reference_load,
    with_overrides,
)
from cosseratshell.errors import (
    ConfigurationError,
    ConvergenceError,
    ScenarioError,
    SingularSystemError,
)
from cosseratshell.solver.newton import run

EXIT_OK = 0
EXIT_SCENARIO = 2
EXIT_SOLVER = 3
LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"


def configure_logging(quiet: bool = False):
    level = logging.WARNING if quiet else os.getenv("COSSERATSHELL_LOG_LEVEL", "INFO").upper()
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)


def run_scenario(
    config: ScenarioConfig, out_dir, progress: bool = False
) -> RunOutputs:
    """Solve one scenario and write its artifacts under ``out_dir``.

    Writes ``load_deflection.csv``, ``report.txt``, ``report.log`` and mesh
    dumps in ``mesh/``. On solver failure the partial CSV and report are
    written before the error propagates. Scenarios with an end-rotation
    target have their edge loads calibrated first.

    Raises:
        ScenarioError: If the problem cannot be built.
        ConvergenceError: If a load step cannot be equilibrated.
        SingularSystemError: If a tangent cannot be factorized.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(out_dir / "report.log", mode="w")
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root = logging.getLogger()
    root.addHandler(handler)
    try:
        if config.target_rotation is not None:
            config, _ = calibrate_loads(config)
        mesh, env, settings = build_problem(config)
        settings.progress = progress
        logging.info(
            f"{config.name}: {mesh.n_elements} elements, {mesh.n_dofs} dofs, "
            f"{settings.load_steps} load steps"
        )
        recorder = LoadDeflectionRecorder(
            reference_load(config, env),
            mesh_dir=None if config.mesh_dumps == "none" else out_dir / "mesh",
            dumps=config.mesh_dumps,
            load_steps=settings.load_steps,
        )
        outputs = RunOutputs(out_dir)
        try:
            outputs.report = run(mesh, settings, env, on_step=recorder)
        except ConvergenceError as exc:
            outputs.report = exc.report
            raise
        finally:
            outputs.csv_path = recorder.write_csv(out_dir / "load_deflection.csv")
            outputs.mesh_dumps = recorder.mesh_dumps
            if outputs.report is not None:
                outputs.report_path = outputs.report.write(out_dir / "report.txt")
        logging.info(f"{config.name}: outputs written to {out_dir}")
        return outputs
    finally:
        root.removeHandler(handler)
        handler.close()


def run_benchmark(name: str, out_dir=None, progress: bool = False, **overrides) -> RunOutputs:
    """Run a bundled scenario by name.

    Args:
        name: Scenario name as listed by ``cosseratshell list``.
        out_dir: Parent output directory; a sub-directory per scenario is made.
        progress: Show a load-step progress bar.
        **overrides: Solver settings replacing the scenario's own.

    Raises:
        ScenarioError: If the name is unknown or the file is invalid.
    """
    scenarios = bundled_scenarios()
    if name not in scenarios:
        raise ScenarioError(f"unknown benchmark '{name}', see 'cosseratshell list'")
    config = with_overrides(parse_scenario(scenarios[name]), **overrides)
    out_dir = Path(out_dir or os.getenv("COSSERATSHELL_OUT", "results"))
    return run_scenario(config, out_dir / config.name, progress)


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, (ConfigurationError, FileNotFoundError)):
        return EXIT_SCENARIO
    if isinstance(exc, (ConvergenceError, SingularSystemError)):
        return EXIT_SOLVER
    raise exc


def _bench_worker(name: str, out_dir: str, quiet: bool, overrides: dict) -> Tuple[str, int, str]:
    configure_logging(quiet)
    try:
        run_benchmark(name, out_dir, **overrides)
    except Exception as exc:
        return name, _exit_code(exc), str(exc)
    return name, EXIT_OK, "converged"


def bench_all(out_dir, jobs: int = 1, quiet: bool = False, **overrides) -> int:
    """Run every bundled scenario; returns the largest exit code."""
    names = list(bundled_scenarios())
    results: List[Tuple[str, int, str]] = []
    if jobs <= 1:
        for name in tqdm(names, desc="benchmarks", disable=quiet):
            results.append(_bench_worker(name, str(out_dir), quiet, overrides))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_bench_worker, name, str(out_dir), quiet, overrides)
                for name in names
            ]
            for future in tqdm(as_completed(futures), total=len(futures), desc="benchmarks", disable=quiet):
                results.append(future.result())
    for name, code, message in sorted(results):
        if code != EXIT_OK:
            logging.error(f"{name}: {message}")
    failed = [name for name, code, _ in results if code != EXIT_OK]
    logging.info(f"{len(results) - len(failed)}/{len(results)} benchmarks converged")
    return max((code for _, code, _ in results), default=EXIT_OK)


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command line arguments."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--out",
        default=os.getenv("COSSERATSHELL_OUT", "results"),
        help="Output directory (default: %(default)s)",
    )
    common.add_argument("--steps", type=int, default=None, help="Override the number of load steps")
    common.add_argument("--tol", type=float, default=None, help="Override the absolute residual tolerance")
    common.add_argument("--max-iter", type=int, default=None, help="Override the Newton iteration limit")
    common.add_argument("--quiet", action="store_true", help="Only log warnings and errors")

    parser = argparse.ArgumentParser(
        prog="cosseratshell", description="Static Cosserat shell solver and benchmark suite"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_parser = sub.add_parser("run", parents=[common], help="Run a scenario file")
    run_parser.add_argument("config", help="Path to the scenario file")
    bench_parser = sub.add_parser("bench", parents=[common], help="Run bundled benchmarks")
    bench_parser.add_argument("name", help="Benchmark name or 'all'")
    bench_parser.add_argument(
        "--jobs", type=int, default=1, help="Parallel processes for 'all' (default: %(default)s)"
    )
    sub.add_parser("list", help="List bundled benchmarks")
    return parser.parse_args(argv)


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = parse_args(argv)
    if args.command == "list":
        for name, path in bundled_scenarios().items():
            print(f"{name:28s} {parse_scenario(path).description}")
        return EXIT_OK

    configure_logging(args.quiet)
    overrides = {"load_steps": args.steps, "tol_residual": args.tol, "max_iters": args.max_iter}
    overrides = {k: v for k, v in overrides.items() if v is not None}
    try:
        if args.command == "run":
            config = with_overrides(parse_scenario(args.config), **overrides)
            outputs = run_scenario(config, Path(args.out) / config.name, not args.quiet)
        elif args.name == "all":
            return bench_all(args.out, args.jobs, args.quiet, **overrides)
        else:
            outputs = run_benchmark(args.name, args.out, not args.quiet, **overrides)
    except (ConfigurationError, FileNotFoundError, ConvergenceError, SingularSystemError) as exc:
        logging.error(str(exc))
        return _exit_code(exc)
    logging.info(f"CSV written to {outputs.csv_path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
