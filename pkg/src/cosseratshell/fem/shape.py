"""Bilinear quadrilateral shape functions and evaluation points.

Each element is mapped onto the reference square [-1, 1]^2 with nodes at
(-1, -1), (1, -1), (1, 1), (-1, 1) in counter-clockwise order. Every element
carries five evaluation points: the centroid first, then the 2x2 Gauss
points.
"""

from typing import Optional, Tuple

import numpy as np

from cosseratshell.errors import MeshError
from cosseratshell.kinematics.liegroup import ad

NODE_SIGNS = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
GAUSS = 1.0 / np.sqrt(3.0)
EVALUATION_POINTS = np.array(
    [[0.0, 0.0], [-GAUSS, -GAUSS], [GAUSS, -GAUSS], [GAUSS, GAUSS], [-GAUSS, GAUSS]]
)
CENTROID = 0
GAUSS_SLICE = slice(1, 5)
GAUSS_WEIGHTS = np.ones(4)
CENTROID_WEIGHT = 4.0
MIN_CHART_JACOBIAN = 1e-14


def shape_functions(
    x: float, y: float, node_xi: Optional[np.ndarray] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """Values and derivatives of N^i = (1 + x x_i)(1 + y y_i)/4.

    Args:
        x, y: Reference-square coordinates.
        node_xi: Optional 4x2 chart coordinates of the element nodes. When
            given, derivatives are returned with respect to (xi1, xi2).

    Returns:
        (N, dN) with N of shape (4,) and dN of shape (4, 2).

    Raises:
        MeshError: If the chart jacobian is not positive.
    """
    sx, sy = NODE_SIGNS[:, 0], NODE_SIGNS[:, 1]
    N = 0.25 * (1.0 + x * sx) * (1.0 + y * sy)
    dN = np.stack([0.25 * sx * (1.0 + y * sy), 0.25 * sy * (1.0 + x * sx)], axis=1)
    if node_xi is None:
        return N, dN
    J = np.asarray(node_xi, dtype=float).T @ dN
    det = np.linalg.det(J)
    if det <= MIN_CHART_JACOBIAN:
        raise MeshError(f"non-positive chart jacobian {det:.3e} at ({x}, {y})")
    return N, dN @ np.linalg.inv(J)


def chart_jacobian(x: float, y: float, node_xi: np.ndarray) -> float:
    """Determinant of d(xi1, xi2)/d(x, y)."""
    _, dN = shape_functions(x, y)
    return float(np.linalg.det(np.asarray(node_xi, dtype=float).T @ dN))


def element_geometry(node_xi: np.ndarray):
    """Shape data of one element at its five evaluation points.

    Returns:
        Tuple (N, dN, det) of shapes (5, 4), (5, 4, 2) and (5,).
    """
    N = np.zeros((5, 4))
    dN = np.zeros((5, 4, 2))
    det = np.zeros(5)
    for p, (x, y) in enumerate(EVALUATION_POINTS):
        N[p], dN[p] = shape_functions(x, y, node_xi)
        det[p] = chart_jacobian(x, y, node_xi)
    return N, dN, det


def K_operator(Ni: float, dNi: np.ndarray, zeta: np.ndarray, alpha: int) -> np.ndarray:
    """Discrete K-bar operator (dN^i/dxi^alpha) I + N^i ad(zeta_alpha)."""
    return dNi[alpha] * np.eye(6) + Ni * ad(np.asarray(zeta)[:, alpha])
