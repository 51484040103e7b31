"""Structured quadrilateral shell meshes and their evolving state.

Nodes carry reference and current poses. Elements carry, at their five
evaluation points (centroid, then Gauss points), the reference and current
deformation twists, the reference and current rotations, quadrature
weights and constitutive blocks. The twists and point rotations are
evolved by the solver's update rule and never re-derived from nodal poses.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from cosseratshell.errors import DegenerateReferenceError, MeshError
from cosseratshell.fem.shape import (
    CENTROID_WEIGHT,
    EVALUATION_POINTS,
    GAUSS_WEIGHTS,
    element_geometry,
    shape_functions,
)
from cosseratshell.kinematics.surface import DEGENERATE_JACOBIAN, ReferenceSurface
from cosseratshell.mechanics.constitutive import Material, stiffness_blocks

FRAMES = ("follower", "dead")


@dataclass
class NodalLoad:
    """Wrench at a node; follower components are local, dead ones spatial."""

    node: int
    wrench: np.ndarray
    frame: str = "follower"

    def __post_init__(self):
        self.wrench = np.asarray(self.wrench, dtype=float)
        if self.frame not in FRAMES:
            raise MeshError(f"unknown load frame '{self.frame}', expected one of {FRAMES}")
        if self.wrench.shape != (6,):
            raise MeshError(f"nodal wrench must have 6 components, got {self.wrench.shape}")


class ShellMesh:
    """Quad mesh over one or more chart rectangles with its current state."""

    def __init__(
        self,
        node_xi: np.ndarray,
        node_R0: np.ndarray,
        node_P0: np.ndarray,
        elements: np.ndarray,
        N: np.ndarray,
        dN: np.ndarray,
        weights: np.ndarray,
        point_R0: np.ndarray,
        zeta0: np.ndarray,
        blocks: np.ndarray,
        grids: Optional[List[np.ndarray]] = None,
        ad_mode: str = "centroid",
        integration: str = "full",
    ):
        self.node_xi = np.asarray(node_xi, dtype=float)
        self.node_R0 = np.asarray(node_R0, dtype=float)
        self.node_P0 = np.asarray(node_P0, dtype=float)
        self.elements = np.asarray(elements, dtype=int)
        self.N = N
        self.dN = dN
        self.weights = weights
        self.point_R0 = point_R0
        self.zeta0 = zeta0
        self.blocks = blocks
        self.grids = grids or []
        if ad_mode not in ("centroid", "gauss"):
            raise MeshError(f"unknown ad_mode '{ad_mode}'")
        if integration not in ("full", "selective"):
            raise MeshError(f"unknown integration '{integration}'")
        self.ad_mode = ad_mode
        self.integration = integration

        self.node_R = self.node_R0.copy()
        self.node_P = self.node_P0.copy()
        self.point_R = self.point_R0.copy()
        self.zeta = self.zeta0.copy()

        self.dirichlet = np.zeros((self.n_nodes, 6), dtype=bool)
        self.loads: List[NodalLoad] = []
        self.area_wrench = np.zeros(6)
        self.remanent = np.zeros((self.n_elements, 3))
        self._check_integrity()

    @property
    def n_nodes(self) -> int:
        return len(self.node_xi)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def n_dofs(self) -> int:
        return 6 * self.n_nodes

    def _check_integrity(self):
        if self.elements.ndim != 2 or self.elements.shape[1] != 4:
            raise MeshError(f"elements must be an (n, 4) array, got {self.elements.shape}")
        if self.elements.min() < 0 or self.elements.max() >= self.n_nodes:
            raise MeshError("element connectivity references a missing node")
        used = np.zeros(self.n_nodes, dtype=bool)
        used[self.elements.ravel()] = True
        if not used.all():
            raise MeshError(f"nodes {np.flatnonzero(~used).tolist()} belong to no element")

    def clamp(self, nodes: Sequence[int], mask: Sequence[bool] = (True,) * 6):
        """Constrain the masked DOFs of the given nodes."""
        self.dirichlet[np.asarray(nodes, dtype=int)] |= np.asarray(mask, dtype=bool)

    def add_load(self, node: int, wrench: np.ndarray, frame: str = "follower"):
        self.loads.append(NodalLoad(int(node), wrench, frame))

    def validate_boundary(self):
        """Reject loads acting on constrained DOFs."""
        for load in self.loads:
            clash = self.dirichlet[load.node] & (load.wrench != 0.0)
            if clash.any():
                raise MeshError(
                    f"node {load.node} carries a load on constrained dofs {np.flatnonzero(clash).tolist()}"
                )

    def free_dofs(self) -> np.ndarray:
        return np.flatnonzero(~self.dirichlet.ravel())

    def snapshot(self) -> Dict[str, np.ndarray]:
        return {
            "node_R": self.node_R.copy(),
            "node_P": self.node_P.copy(),
            "point_R": self.point_R.copy(),
            "zeta": self.zeta.copy(),
        }

    def restore(self, state: Dict[str, np.ndarray]):
        for key, value in state.items():
            setattr(self, key, value.copy())

    def edge_nodes(self, side: str, patch: int = 0) -> np.ndarray:
        """Nodes of a patch edge: 'root' (xi1 min), 'tip' (xi1 max), 'bottom' (xi2 min)."""
        grid = self.grids[patch]
        if side == "root":
            return grid[:, 0]
        if side == "tip":
            return grid[:, -1]
        if side == "bottom":
            return grid[0, :]
        raise MeshError(f"unknown edge '{side}'")

    @classmethod
    def merge(cls, meshes: Sequence["ShellMesh"]) -> "ShellMesh":
        """Join disconnected meshes into one; boundary data is carried over."""
        first = meshes[0]
        offsets = np.cumsum([0] + [m.n_nodes for m in meshes[:-1]])

        def cat(name):
            return np.concatenate([getattr(m, name) for m in meshes])

        merged = cls(
            cat("node_xi"),
            cat("node_R0"),
            cat("node_P0"),
            np.concatenate([m.elements + o for m, o in zip(meshes, offsets)]),
            cat("N"),
            cat("dN"),
            cat("weights"),
            cat("point_R0"),
            cat("zeta0"),
            cat("blocks"),
            grids=[g + o for m, o in zip(meshes, offsets) for g in m.grids],
            ad_mode=first.ad_mode,
            integration=first.integration,
        )
        merged.dirichlet = cat("dirichlet")
        merged.remanent = cat("remanent")
        merged.area_wrench = first.area_wrench.copy()
        merged.loads = [
            NodalLoad(load.node + o, load.wrench, load.frame)
            for m, o in zip(meshes, offsets)
            for load in m.loads
        ]
        return merged


def build_mesh(
    surface: ReferenceSurface,
    nx: int,
    ny: int,
    material: Material,
    ad_mode: str = "centroid",
    integration: str = "full",
) -> ShellMesh:
    """Structured nx x ny mesh over the chart of a reference surface.

    Node (i, j) has index j (nx + 1) + i, so xi1 runs fastest. Elements list
    their nodes counter-clockwise in the chart.

    Raises:
        MeshError: For non-positive element counts.
        DegenerateReferenceError: If the surface element vanishes anywhere.
    """
    if nx < 1 or ny < 1:
        raise MeshError(f"element counts must be positive, got {nx} x {ny}")
    a1, b1, a2, b2 = surface.chart
    xi1 = np.linspace(a1, b1, nx + 1)
    xi2 = np.linspace(a2, b2, ny + 1)
    grid = np.arange((nx + 1) * (ny + 1)).reshape(ny + 1, nx + 1)
    node_xi = np.array([[x1, x2] for x2 in xi2 for x1 in xi1])

    poses = [surface.pose_at(*p) for p in node_xi]
    node_R0 = np.array([g.R for g in poses])
    node_P0 = np.array([g.P for g in poses])

    elements = np.array(
        [
            [grid[j, i], grid[j, i + 1], grid[j + 1, i + 1], grid[j + 1, i]]
            for j in range(ny)
            for i in range(nx)
        ]
    )
    n_el = len(elements)
    N = np.zeros((n_el, 5, 4))
    dN = np.zeros((n_el, 5, 4, 2))
    weights = np.zeros((n_el, 5))
    point_R0 = np.zeros((n_el, 5, 3, 3))
    zeta0 = np.zeros((n_el, 5, 6, 2))
    Ainv = np.zeros((n_el, 5, 2, 2))
    rule = np.concatenate([[CENTROID_WEIGHT], GAUSS_WEIGHTS])

    for e, nodes in enumerate(elements):
        corner_xi = node_xi[nodes]
        N[e], dN[e], det = element_geometry(corner_xi)
        for p, (x, y) in enumerate(EVALUATION_POINTS):
            point = shape_functions(x, y)[0] @ corner_xi
            jac = surface.jac_at(*point)
            if jac < DEGENERATE_JACOBIAN:
                raise DegenerateReferenceError(
                    f"surface element {jac:.3e} at chart point {tuple(point)}"
                )
            weights[e, p] = rule[p] * det[p] * jac
            point_R0[e, p] = surface.pose_at(*point).R
            zeta0[e, p] = surface.twists_at(*point)
            Ainv[e, p] = surface.metric_inverse(*point)

    return ShellMesh(
        node_xi,
        node_R0,
        node_P0,
        elements,
        N,
        dN,
        weights,
        point_R0,
        zeta0,
        stiffness_blocks(material, Ainv),
        grids=[grid],
        ad_mode=ad_mode,
        integration=integration,
    )


def write_mesh_dump(mesh: ShellMesh, path) -> Path:
    """Plain-text dump of nodes and elements.

    Node lines read ``id xi1 xi2 px py pz r11 r12 r13 r21 r22 r23 r31 r32 r33``
    and element lines ``id n1 n2 n3 n4``, each block preceded by a
    ``# nodes <count>`` or ``# elements <count>`` header.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# nodes {mesh.n_nodes}"]
    for k in range(mesh.n_nodes):
        values = np.concatenate([mesh.node_xi[k], mesh.node_P[k], mesh.node_R[k].ravel()])
        lines.append(f"{k} " + " ".join(f"{v:.12g}" for v in values))
    lines.append(f"# elements {mesh.n_elements}")
    for e, nodes in enumerate(mesh.elements):
        lines.append(f"{e} " + " ".join(str(n) for n in nodes))
    path.write_text("\n".join(lines) + "\n")
    return path
