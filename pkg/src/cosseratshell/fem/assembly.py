"""Global assembly and boundary conditions.

Sign convention: with FU = f_ext - f_int and FM = -f_mag the equilibrium
system reads (K_MG - KM) eta = FU - FM, i.e.

    A = Kmat + Kgeo - Kmag - K_load,   b = f_ext - f_int + f_mag,

where K_load is the stiffness of dead nodal loads, whose local components
change as the nodes rotate.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from cosseratshell.errors import ConfigurationError, MeshError
from cosseratshell.fem.element import ElementKernelOutput
from cosseratshell.fem.mesh import ShellMesh
from cosseratshell.kinematics.liegroup import skew


@dataclass
class GlobalSystem:
    """Sparse tangent and right-hand side over the listed global DOFs."""

    A: sp.csr_matrix
    b: np.ndarray
    dofs: np.ndarray
    load_norm: float = 0.0

    @property
    def size(self) -> int:
        return len(self.b)


def dof_map(elements: np.ndarray) -> np.ndarray:
    """Global DOF numbers of each element, shape (n_elements, 24)."""
    elements = np.asarray(elements, dtype=int)
    return (6 * elements[:, :, None] + np.arange(6)).reshape(len(elements), 24)


def assemble(mesh: ShellMesh, kernels: ElementKernelOutput) -> GlobalSystem:
    """Scatter-add element blocks into the global system.

    Raises:
        MeshError: If a DOF index falls outside the mesh.
    """
    n = mesh.n_dofs
    dofs = dof_map(mesh.elements)
    if dofs.size and (dofs.min() < 0 or dofs.max() >= n):
        raise MeshError(f"dof index outside [0, {n})")
    blocks = kernels.Kmat + kernels.Kgeo - kernels.Kmag
    rows = np.broadcast_to(dofs[:, :, None], blocks.shape)
    cols = np.broadcast_to(dofs[:, None, :], blocks.shape)
    A = sp.coo_matrix(
        (blocks.ravel(), (rows.ravel(), cols.ravel())), shape=(n, n)
    ).tocsr()

    b = np.zeros(n)
    np.add.at(b, dofs.ravel(), (kernels.f_ext - kernels.f_int + kernels.f_mag).ravel())
    load = np.zeros(n)
    np.add.at(load, dofs.ravel(), (kernels.f_ext + kernels.f_mag).ravel())
    return GlobalSystem(A, b, np.arange(n), float(np.linalg.norm(load)))


def nodal_loads(mesh: ShellMesh, load_factor: float = 1.0):
    """Local nodal load vector and dead-load stiffness at the current state."""
    n = mesh.n_dofs
    f = np.zeros(n)
    rows, cols, data = [], [], []
    for load in mesh.loads:
        w = load_factor * load.wrench
        base = 6 * load.node
        if load.frame == "follower":
            f[base : base + 6] += w
            continue
        Rt = mesh.node_R[load.node].T
        local = np.concatenate([Rt @ w[:3], Rt @ w[3:]])
        f[base : base + 6] += local
        block = np.zeros((6, 6))
        block[:3, 3:] = skew(local[:3])
        block[3:, 3:] = skew(local[3:])
        r, c = np.nonzero(block)
        rows.extend(base + r)
        cols.extend(base + c)
        data.extend(block[r, c])
    K = sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
    return f, K


def apply_boundary_conditions(
    system: GlobalSystem, mesh: ShellMesh, load_factor: float = 1.0
) -> GlobalSystem:
    """Add Neumann loads and eliminate clamped DOFs.

    Dead loads are rotated into the local frame with the current nodal
    rotation; follower loads enter unrotated.

    Raises:
        ConfigurationError: If no DOF is left free.
    """
    free = mesh.free_dofs()
    if free.size == 0:
        raise ConfigurationError("every degree of freedom is constrained")
    f_nodal, K_load = nodal_loads(mesh, load_factor)
    A = (system.A - K_load).tocsr()
    b = system.b + f_nodal
    load_norm = float(np.hypot(system.load_norm, np.linalg.norm(f_nodal)))
    return GlobalSystem(A[free][:, free], b[free], free, load_norm)
