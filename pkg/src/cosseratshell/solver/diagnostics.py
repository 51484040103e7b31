"""Post-processing quantities used by the benchmarks and the tests."""

from typing import Optional, Sequence, Tuple

import numpy as np

from cosseratshell.fem.assembly import assemble, nodal_loads
from cosseratshell.fem.element import elastic_energy, element_kernels, magnetic_energy
from cosseratshell.fem.mesh import ShellMesh
from cosseratshell.kinematics.liegroup import rotation_angle
from cosseratshell.mechanics.magnetics import MagneticEnvironment


def mechanical_tangent(
    mesh: ShellMesh, load_factor: float = 1.0, include_loads: bool = True
) -> np.ndarray:
    """Dense Kmat + Kgeo (minus dead-load stiffness) without BC elimination."""
    system = assemble(mesh, element_kernels(mesh, None, load_factor))
    A = system.A.toarray()
    if include_loads:
        A -= nodal_loads(mesh, load_factor)[1].toarray()
    return A


def skew_ratio(A, dofs: Optional[Sequence[int]] = None) -> float:
    """||A - A^T|| / ||A|| in the Frobenius norm, optionally on a DOF subset."""
    A = A.toarray() if hasattr(A, "toarray") else np.asarray(A, dtype=float)
    if dofs is not None:
        idx = np.asarray(dofs, dtype=int)
        A = A[np.ix_(idx, idx)]
    return float(np.linalg.norm(A - A.T) / np.linalg.norm(A))


def interior_dofs(mesh: ShellMesh, patch: int = 0) -> np.ndarray:
    """Free DOFs of nodes that are neither clamped nor loaded."""
    excluded = set(np.flatnonzero(mesh.dirichlet.any(axis=1)))
    excluded.update(load.node for load in mesh.loads)
    excluded.update(mesh.edge_nodes("tip", patch).tolist())
    nodes = [n for n in range(mesh.n_nodes) if n not in excluded]
    return (6 * np.asarray(nodes)[:, None] + np.arange(6)).ravel()


def total_energy(
    mesh: ShellMesh, env: Optional[MagneticEnvironment] = None, load_factor: float = 1.0
) -> float:
    """Elastic plus magnetic energy minus the work potential of dead forces."""
    energy = elastic_energy(mesh) + magnetic_energy(mesh, env)
    for load in mesh.loads:
        if load.frame == "dead":
            u = mesh.node_P[load.node] - mesh.node_P0[load.node]
            energy -= load_factor * load.wrench[:3] @ u
    return energy


def accumulated_rotation(mesh: ShellMesh, nodes: Sequence[int]) -> float:
    """Sum of relative rotation angles along a chain of nodes."""
    R = mesh.node_R[np.asarray(nodes, dtype=int)]
    relative = np.swapaxes(R[:-1], -1, -2) @ R[1:]
    R0 = mesh.node_R0[np.asarray(nodes, dtype=int)]
    relative0 = np.swapaxes(R0[:-1], -1, -2) @ R0[1:]
    return float(np.sum(rotation_angle(relative)) - np.sum(rotation_angle(relative0)))


def winding_number(mesh: ShellMesh, patch: int = 0) -> int:
    return int(round(accumulated_rotation(mesh, mesh.edge_nodes("bottom", patch)) / (2 * np.pi)))


def tip_displacement(mesh: ShellMesh, patch: int = 0) -> np.ndarray:
    """Mean displacement of the tip edge."""
    tip = mesh.edge_nodes("tip", patch)
    return np.mean(mesh.node_P[tip] - mesh.node_P0[tip], axis=0)


def fit_circle(points: np.ndarray) -> Tuple[np.ndarray, float]:
    """Least-squares circle through points lying close to a plane.

    Returns:
        (center, radius).
    """
    points = np.asarray(points, dtype=float)
    mean = points.mean(axis=0)
    _, _, Vt = np.linalg.svd(points - mean)
    uv = (points - mean) @ Vt[:2].T
    M = np.column_stack([2 * uv, np.ones(len(uv))])
    sol, *_ = np.linalg.lstsq(M, np.sum(uv**2, axis=1), rcond=None)
    center_uv = sol[:2]
    radius = float(np.sqrt(sol[2] + center_uv @ center_uv))
    return mean + center_uv @ Vt[:2], radius
