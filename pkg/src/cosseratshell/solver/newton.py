"""Newton iteration with load stepping on the Lie group.

Each iteration evaluates the element kernels, assembles, solves for nodal
increments eta and applies

    g    <- g exp(eta)
    zeta <- Ad(exp(eta)^-1) zeta + dexp(eta) d_alpha eta

at the nodes and at every element evaluation point. Twists are carried, so
no group element is ever interpolated.
"""

import logging
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve
from scipy.sparse.linalg import splu
from tqdm import tqdm

from cosseratshell.errors import (
    ConfigurationError,
    ConvergenceError,
    DomainError,
    SingularSystemError,
)
from cosseratshell.fem.assembly import GlobalSystem, apply_boundary_conditions, assemble
from cosseratshell.fem.element import element_kernels
from cosseratshell.fem.mesh import ShellMesh
from cosseratshell.kinematics.liegroup import (
    adjoint_matrix,
    dexp_se3,
    exp_se3_arrays,
    exp_so3,
    orthonormalize,
)
from cosseratshell.mechanics.magnetics import MagneticEnvironment

ROTATION_LIMIT = np.pi / 2
CONDITION_WARNING = 1e12
LINEAR_TOL = 1e-10


@dataclass
class SolverSettings:
    tol_residual: float = 1e-10
    tol_relative: float = 1e-8
    max_iters: int = 50
    load_steps: int = 20
    damping: float = 1.0
    linear_solver: str = "auto"
    dense_limit: int = 600
    max_halvings: int = 8
    progress: bool = False

    def __post_init__(self):
        if not (self.tol_residual > 0 and self.tol_relative > 0):
            raise ConfigurationError("tolerances must be positive")
        if self.max_iters < 1 or self.load_steps < 1:
            raise ConfigurationError("max_iters and load_steps must be at least 1")
        if not 0 < self.damping <= 1:
            raise ConfigurationError(f"damping must lie in (0, 1], got {self.damping}")
        if self.linear_solver not in ("auto", "dense", "sparse"):
            raise ConfigurationError(f"unknown linear solver '{self.linear_solver}'")


@dataclass
class StepRecord:
    step: int
    load_factor: float
    iterations: int = 0
    residuals: List[float] = field(default_factory=list)
    halvings: int = 0
    converged: bool = False


@dataclass
class SolveReport:
    steps: List[StepRecord] = field(default_factory=list)
    converged: bool = False
    wall_time: float = 0.0

    @property
    def iterations(self) -> List[int]:
        return [s.iterations for s in self.steps]

    def to_text(self) -> str:
        lines = ["step iter residual"]
        for record in self.steps:
            lines.extend(
                f"{record.step} {i} {r:.6e}" for i, r in enumerate(record.residuals, 1)
            )
        status = "converged" if self.converged else "failed"
        lines.append(f"# {status} in {self.wall_time:.3f} s")
        return "\n".join(lines) + "\n"

    def write(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_text())
        return path


class _NotConverged(Exception):
    def __init__(self, residuals):
        self.residuals = residuals
        super().__init__("Newton iteration did not converge")


def solve_linear(A, b: np.ndarray, method: str = "auto", dense_limit: int = 600) -> np.ndarray:
    """Solve A x = b by LU with partial pivoting, dense or sparse.

    Raises:
        SingularSystemError: If the factorization breaks down.
    """
    n = len(b)
    if not np.any(b):
        return np.zeros(n)
    if method == "dense" or (method == "auto" and n <= dense_limit):
        M = A.toarray() if hasattr(A, "toarray") else np.asarray(A, dtype=float)
        with warnings.catch_warnings():
            warnings.simplefilter("error", LinAlgWarning)
            try:
                factors = lu_factor(M)
            except (LinAlgWarning, ValueError) as exc:
                raise SingularSystemError(f"dense LU failed: {exc}") from exc
        pivots = np.abs(np.diag(factors[0]))
        condition = _pivot_ratio(pivots)
        x = lu_solve(factors, b)
        x += lu_solve(factors, b - M @ x)
    else:
        try:
            lu = splu(A.tocsc())
        except RuntimeError as exc:
            raise SingularSystemError(f"sparse LU failed: {exc}") from exc
        condition = _pivot_ratio(np.abs(lu.U.diagonal()))
        x = lu.solve(b)
        x += lu.solve(b - A @ x)
    if not np.all(np.isfinite(x)):
        raise SingularSystemError("linear solve produced non-finite values", condition)
    if condition > CONDITION_WARNING:
        logging.warning(f"ill-conditioned tangent, pivot ratio {condition:.3e}")
    rel = np.linalg.norm(A @ x - b) / np.linalg.norm(b)
    if rel > LINEAR_TOL:
        logging.warning(f"linear solve residual {rel:.3e} above {LINEAR_TOL:.0e}")
    return x


def _pivot_ratio(pivots: np.ndarray) -> float:
    smallest = pivots.min() if pivots.size else 0.0
    if smallest == 0.0:
        raise SingularSystemError("zero pivot in LU factorization")
    return float(pivots.max() / smallest)


def newton_step(
    mesh: ShellMesh, system: GlobalSystem, settings: Optional[SolverSettings] = None
) -> np.ndarray:
    """Nodal increments eta, shape (n_nodes, 6), zero on clamped DOFs."""
    settings = settings or SolverSettings()
    x = solve_linear(system.A, system.b, settings.linear_solver, settings.dense_limit)
    eta = np.zeros(mesh.n_dofs)
    eta[system.dofs] = x
    return eta.reshape(mesh.n_nodes, 6)


def update_configuration(mesh: ShellMesh, eta: np.ndarray) -> ShellMesh:
    """Right-multiply nodal poses by exp(eta).

    Raises:
        DomainError: If any rotational increment exceeds pi/2.
    """
    eta = np.asarray(eta, dtype=float)
    largest = float(np.max(np.linalg.norm(eta[:, 3:], axis=1), initial=0.0))
    if largest > ROTATION_LIMIT:
        raise DomainError(f"rotation increment {largest:.3f} rad exceeds pi/2")
    R_inc, P_inc = exp_se3_arrays(eta)
    mesh.node_P = mesh.node_P + np.einsum("nij,nj->ni", mesh.node_R, P_inc)
    mesh.node_R = orthonormalize(mesh.node_R @ R_inc)
    return mesh


def update_twists(mesh: ShellMesh, eta: np.ndarray) -> ShellMesh:
    """Evolve twists and point rotations with the interpolated increment field."""
    eta_e = np.asarray(eta, dtype=float)[mesh.elements]
    eta_p = np.einsum("epi,eic->epc", mesh.N, eta_e)
    d_eta = np.einsum("epia,eic->epca", mesh.dN, eta_e)
    R_inv, P_inv = exp_se3_arrays(-eta_p)
    mesh.zeta = adjoint_matrix(R_inv, P_inv) @ mesh.zeta + dexp_se3(eta_p) @ d_eta
    mesh.point_R = orthonormalize(mesh.point_R @ exp_so3(eta_p[..., 3:]))
    return mesh


def equilibrium_system(
    mesh: ShellMesh, load_factor: float, env: Optional[MagneticEnvironment] = None
) -> GlobalSystem:
    """Reduced system at the current state and load level."""
    scaled = env.scaled(load_factor) if env is not None else None
    kernels = element_kernels(mesh, scaled, load_factor)
    return apply_boundary_conditions(assemble(mesh, kernels), mesh, load_factor)


def _equilibrate(mesh, load_factor, env, settings, step) -> List[float]:
    residuals = []
    for it in range(1, settings.max_iters + 1):
        system = equilibrium_system(mesh, load_factor, env)
        residual = float(np.linalg.norm(system.b))
        residuals.append(residual)
        logging.info(f"step {step} iter {it} residual {residual:.6e}")
        if not np.isfinite(residual):
            raise _NotConverged(residuals)
        tol = max(settings.tol_residual, settings.tol_relative * max(1.0, system.load_norm))
        if residual <= tol:
            return residuals
        eta = settings.damping * newton_step(mesh, system, settings)
        update_configuration(mesh, eta)
        update_twists(mesh, eta)
    raise _NotConverged(residuals)


def run(
    mesh: ShellMesh,
    settings: Optional[SolverSettings] = None,
    env: Optional[MagneticEnvironment] = None,
    on_step: Optional[Callable[[int, float, ShellMesh, Optional[StepRecord]], None]] = None,
) -> SolveReport:
    """Ramp all loads linearly over the load steps and equilibrate each one.

    Loads stored on the mesh and the applied field are treated as their
    full magnitudes. A failed increment (rotation limit or max_iters) is
    retried from the last equilibrium with half the load increment; the
    halving limit counts consecutive failures since the last accepted
    sub-increment.

    Args:
        mesh: Mesh at its current (usually reference) state; updated in place.
        settings: Solver settings.
        env: Applied magnetic field at full load.
        on_step: Called with (step, load_factor, mesh, record) after the zero
            state and after each converged step.

    Returns:
        SolveReport of the run.

    Raises:
        ConvergenceError: If a step cannot be equilibrated after the allowed
            number of halvings.
    """
    settings = settings or SolverSettings()
    mesh.validate_boundary()
    report = SolveReport()
    start = time.perf_counter()
    if on_step is not None:
        on_step(0, 0.0, mesh, None)

    current = 0.0
    steps = range(1, settings.load_steps + 1)
    for k in tqdm(steps, desc="load steps", disable=not settings.progress):
        target = k / settings.load_steps
        record = StepRecord(k, target)
        trial = target
        consecutive = 0
        while True:
            state = mesh.snapshot()
            try:
                residuals = _equilibrate(mesh, trial, env, settings, k)
            except (DomainError, _NotConverged) as exc:
                mesh.restore(state)
                record.residuals.extend(getattr(exc, "residuals", []))
                record.halvings += 1
                consecutive += 1
                if consecutive > settings.max_halvings:
                    report.steps.append(record)
                    report.wall_time = time.perf_counter() - start
                    raise ConvergenceError(
                        f"load step {k} failed after {settings.max_halvings} halvings", report
                    ) from exc
                trial = current + 0.5 * (trial - current)
                logging.warning(f"step {k}: {exc}; retrying at load factor {trial:.6g}")
                continue
            record.residuals.extend(residuals)
            record.iterations += len(residuals)
            current = trial
            consecutive = 0
            if current >= target - 1e-14:
                break
            trial = target
        record.converged = True
        report.steps.append(record)
        if on_step is not None:
            on_step(k, target, mesh, record)

    report.converged = True
    report.wall_time = time.perf_counter() - start
    logging.info(f"solve converged in {report.wall_time:.2f} s, {sum(report.iterations)} iterations")
    return report
