"""Reference shell surfaces, deformation twists and strain measures.

A shell configuration is a field g(xi1, xi2) in SE(3) over a rectangular
chart. Its deformation twists are zeta_alpha = (g^-1 dg/dxi^alpha)^vee,
stored as the two columns of a 6x2 matrix.
"""

from abc import ABC, abstractmethod
from typing import Callable, NamedTuple, Tuple

import numpy as np

from cosseratshell.errors import DegenerateReferenceError, DomainError
from cosseratshell.kinematics.liegroup import Pose, exp_so3, log_se3

DEGENERATE_JACOBIAN = 1e-12


class ParamPoint(NamedTuple):
    xi1: float
    xi2: float


class ReferenceSurface(ABC):
    """Stress-free shell configuration over the chart [a1, b1] x [a2, b2]."""

    @property
    @abstractmethod
    def chart(self) -> Tuple[float, float, float, float]:
        """Chart rectangle as (xi1_min, xi1_max, xi2_min, xi2_max)."""

    @abstractmethod
    def pose_at(self, xi1: float, xi2: float) -> Pose:
        """Reference pose g0 at a chart point."""

    @abstractmethod
    def twists_at(self, xi1: float, xi2: float) -> np.ndarray:
        """Reference twists (zeta_01, zeta_02) as a 6x2 matrix."""

    def contains(self, xi1: float, xi2: float, tol: float = 1e-9) -> bool:
        a1, b1, a2, b2 = self.chart
        return a1 - tol <= xi1 <= b1 + tol and a2 - tol <= xi2 <= b2 + tol

    def jac_at(self, xi1: float, xi2: float) -> float:
        """Surface element |A1 x A2|."""
        C = self.twists_at(xi1, xi2)[:3]
        return float(np.linalg.norm(np.cross(C[:, 0], C[:, 1])))

    def metric_inverse(self, xi1: float, xi2: float) -> np.ndarray:
        """Components A^{alpha beta} of the inverse surface metric.

        The local linear twist parts C_alpha = R0^T A_alpha share the inner
        products of the spatial tangents.
        """
        C = self.twists_at(xi1, xi2)[:3]
        metric = C.T @ C
        if np.linalg.det(metric) < DEGENERATE_JACOBIAN**2:
            raise DegenerateReferenceError(
                f"degenerate surface metric at ({xi1}, {xi2})"
            )
        return np.linalg.inv(metric)


class FlatPlate(ReferenceSurface):
    """Rectangle in the x-y plane, g0 = (I, (xi1, xi2, 0))."""

    def __init__(self, length: float, width: float):
        if length <= 0 or width <= 0:
            raise DomainError(f"plate dimensions must be positive, got {length} x {width}")
        self.length = float(length)
        self.width = float(width)

    @property
    def chart(self):
        return (0.0, self.length, 0.0, self.width)

    def pose_at(self, xi1, xi2):
        return Pose(np.eye(3), np.array([xi1, xi2, 0.0]))

    def twists_at(self, xi1, xi2):
        zeta = np.zeros((6, 2))
        zeta[0, 0] = 1.0
        zeta[1, 1] = 1.0
        return zeta


class CylindricalArch(ReferenceSurface):
    """Circular arch of radius R with generators along the global y axis.

    xi1 is arclength from the crown, xi2 runs along the width. The frame is
    a rotation about y by xi1/R: director 1 is the arc tangent, director 2 the
    generator and director 3 the outward normal. With this convention
    zeta_01 = ((1, 0, 0); (0, 1/R, 0)).
    """

    def __init__(self, radius: float, angle_span: float, width: float):
        if radius <= 0 or width <= 0:
            raise DomainError(f"arch radius and width must be positive, got {radius}, {width}")
        if not 0 < angle_span <= 2 * np.pi + 1e-12:
            raise DomainError(f"angle span must lie in (0, 2 pi], got {angle_span}")
        self.radius = float(radius)
        self.angle_span = float(angle_span)
        self.width = float(width)

    @property
    def chart(self):
        return (0.0, self.radius * self.angle_span, 0.0, self.width)

    def pose_at(self, xi1, xi2):
        theta = xi1 / self.radius
        R = exp_so3(np.array([0.0, theta, 0.0]))
        P = np.array(
            [self.radius * np.sin(theta), xi2, self.radius * np.cos(theta)]
        )
        return Pose(R, P)

    def twists_at(self, xi1, xi2):
        zeta = np.zeros((6, 2))
        zeta[0, 0] = 1.0
        zeta[4, 0] = 1.0 / self.radius
        zeta[1, 1] = 1.0
        return zeta


class RigidlyMovedSurface(ReferenceSurface):
    """Base surface carried by a fixed rigid motion h; twists are unchanged."""

    def __init__(self, base: ReferenceSurface, motion: Pose):
        self.base = base
        self.motion = motion

    @property
    def chart(self):
        return self.base.chart

    def pose_at(self, xi1, xi2):
        return self.motion @ self.base.pose_at(xi1, xi2)

    def twists_at(self, xi1, xi2):
        return self.base.twists_at(xi1, xi2)


def deformation_twists(
    g_field: Callable[[float, float], Pose], point: ParamPoint, step: float = 1e-5
) -> np.ndarray:
    """Deformation twists of an analytic pose field by central differences.

    Uses log(g(xi - h)^-1 g(xi + h)) / 2h, which is second-order accurate and
    always lands in se(3).

    Args:
        g_field: Callable returning the pose at (xi1, xi2).
        point: Chart point.
        step: Difference step.

    Returns:
        6x2 matrix with columns zeta_t1, zeta_t2.
    """
    xi = np.array(point, dtype=float)
    columns = []
    for alpha in range(2):
        offset = np.zeros(2)
        offset[alpha] = step
        g_minus = g_field(*(xi - offset))
        g_plus = g_field(*(xi + offset))
        columns.append(log_se3(g_minus.inverse() @ g_plus) / (2.0 * step))
    return np.stack(columns, axis=1)


def local_deformation_gradient(zeta_t: np.ndarray, zeta_0: np.ndarray) -> np.ndarray:
    """F_e = X_t (X0^T X0)^-1 X0^T.

    Raises:
        DegenerateReferenceError: If the reference twists are not independent.
    """
    X0 = np.asarray(zeta_0, dtype=float)
    if np.linalg.matrix_rank(X0, tol=DEGENERATE_JACOBIAN) < 2:
        raise DegenerateReferenceError("reference twists are linearly dependent")
    X0_star = np.linalg.solve(X0.T @ X0, X0.T)
    return np.asarray(zeta_t, dtype=float) @ X0_star


def strain(zeta_t: np.ndarray, zeta_0: np.ndarray) -> np.ndarray:
    """Cosserat shell strain, columns zeta_t_alpha - zeta_0_alpha."""
    return np.asarray(zeta_t, dtype=float) - np.asarray(zeta_0, dtype=float)
