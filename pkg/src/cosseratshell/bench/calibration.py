"""Load calibration against a target end rotation.

Some benchmarks are specified by the rotation they reach rather than by the
load that produces it. The edge loads of such a scenario are scaled by a
common factor, found by secant iteration on full load-stepped solves.
"""

import logging
from dataclasses import replace
from typing import List, Tuple

from cosseratshell.bench.scenario import ScenarioConfig, build_problem
from cosseratshell.errors import ConfigurationError, ConvergenceError
from cosseratshell.fem.mesh import ShellMesh
from cosseratshell.solver.diagnostics import accumulated_rotation
from cosseratshell.solver.newton import run

MAX_SOLVES = 8


def end_rotation(mesh: ShellMesh) -> float:
    """Rotation accumulated along the bottom edge, root to tip."""
    return accumulated_rotation(mesh, mesh.edge_nodes("bottom"))


def scaled_loads(config: ScenarioConfig, factor: float) -> ScenarioConfig:
    """Copy of the config with every edge-load magnitude multiplied by factor."""
    loads = [
        load if load.magnitude is None else replace(load, magnitude=factor * load.magnitude)
        for load in config.loads
    ]
    return replace(config, loads=loads)


def solve_rotation(config: ScenarioConfig) -> float:
    mesh, env, settings = build_problem(config)
    run(mesh, settings, env)
    return end_rotation(mesh)


def calibrate_loads(
    config: ScenarioConfig, max_solves: int = MAX_SOLVES
) -> Tuple[ScenarioConfig, float]:
    """Scale the edge loads until the end rotation meets the scenario target.

    Starts from the magnitudes in the file, takes one proportional step and
    then secant steps on the scale factor.

    Returns:
        (calibrated config, scale factor applied to the file magnitudes).

    Raises:
        ConfigurationError: If the scenario has no target or the loads do
            not rotate the tip.
        ConvergenceError: If the target is not met within max_solves solves,
            or a solve itself fails.
    """
    target = config.target_rotation
    if target is None:
        raise ConfigurationError(f"scenario '{config.name}' has no end-rotation target")
    tol = config.target_tolerance * target
    scales: List[float] = [1.0]
    rotations: List[float] = [solve_rotation(config)]
    while abs(rotations[-1] - target) > tol:
        if len(scales) >= max_solves:
            raise ConvergenceError(
                f"{config.name}: end rotation {rotations[-1]:.4f} rad after {max_solves} "
                f"solves, target {target:.4f} rad"
            )
        if rotations[-1] <= 0:
            raise ConfigurationError(f"{config.name}: loads do not rotate the tip")
        if len(scales) == 1 or rotations[-1] == rotations[-2]:
            scale = scales[-1] * target / rotations[-1]
        else:
            slope = (rotations[-1] - rotations[-2]) / (scales[-1] - scales[-2])
            scale = scales[-1] + (target - rotations[-1]) / slope
            if scale <= 0:
                scale = scales[-1] * target / rotations[-1]
        logging.info(
            f"{config.name}: end rotation {rotations[-1]:.4f} rad at scale "
            f"{scales[-1]:.5g}, trying {scale:.5g}"
        )
        scales.append(scale)
        rotations.append(solve_rotation(scaled_loads(config, scale)))
    logging.info(
        f"{config.name}: loads scaled by {scales[-1]:.5g} for an end rotation of "
        f"{rotations[-1]:.4f} rad"
    )
    return scaled_loads(config, scales[-1]), scales[-1]
