"""Closed-form algebra of the special Euclidean group SE(3).

Twists are 6-vectors ordered (v; w), linear part first, and wrenches are
ordered (n; m) so that the pairing is n.v + m.w. Every 6x6 operator below
follows this block ordering.

Functions accept a single vector or a stack of them (leading axes are
broadcast), which lets the finite element code update all evaluation points
of a mesh in one call.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from cosseratshell.errors import DomainError, StructuralError

SMALL_ANGLE = 1e-6
SERIES_ANGLE = 1e-2
STRUCTURE_TOL = 1e-12


def skew(w: np.ndarray) -> np.ndarray:
    """Map a 3-vector (or stack) to its skew matrix, skew(w) @ y = w x y."""
    w = np.asarray(w, dtype=float)
    out = np.zeros(w.shape[:-1] + (3, 3))
    out[..., 0, 1] = -w[..., 2]
    out[..., 0, 2] = w[..., 1]
    out[..., 1, 0] = w[..., 2]
    out[..., 1, 2] = -w[..., 0]
    out[..., 2, 0] = -w[..., 1]
    out[..., 2, 1] = w[..., 0]
    return out


def unskew(W: np.ndarray) -> np.ndarray:
    """Inverse of :func:`skew`; reads the lower-triangular entries."""
    W = np.asarray(W, dtype=float)
    return np.stack([W[..., 2, 1], W[..., 0, 2], W[..., 1, 0]], axis=-1)


def _angle_coefficients(theta: np.ndarray):
    """sin(t)/t, (1 - cos t)/t^2 and (t - sin t)/t^3, by series below SERIES_ANGLE.

    The second coefficient uses the half-angle form 0.5 (sin(t/2) / (t/2))^2,
    which has no cancellation.
    """
    theta = np.asarray(theta, dtype=float)
    small = theta < SERIES_ANGLE
    t = np.where(small, 1.0, theta)
    t2 = theta**2
    a = np.where(small, 1.0 - t2 / 6.0 + t2**2 / 120.0, np.sin(t) / t)
    b = np.where(
        small, 0.5 - t2 / 24.0 + t2**2 / 720.0, 0.5 * (np.sin(0.5 * t) / (0.5 * t)) ** 2
    )
    c = np.where(
        small, 1.0 / 6.0 - t2 / 120.0 + t2**2 / 5040.0, (t - np.sin(t)) / t**3
    )
    return a, b, c


def exp_so3(w: np.ndarray) -> np.ndarray:
    """Rodrigues formula."""
    w = np.asarray(w, dtype=float)
    a, b, _ = _angle_coefficients(np.linalg.norm(w, axis=-1))
    W = skew(w)
    return np.eye(3) + a[..., None, None] * W + b[..., None, None] * (W @ W)


def tangent_so3(w: np.ndarray) -> np.ndarray:
    """T(w) = I + (1 - cos t)/t^2 W + (t - sin t)/t^3 W^2, the translation factor of exp."""
    w = np.asarray(w, dtype=float)
    _, b, c = _angle_coefficients(np.linalg.norm(w, axis=-1))
    W = skew(w)
    return np.eye(3) + b[..., None, None] * W + c[..., None, None] * (W @ W)


def rotation_angle(R: np.ndarray) -> np.ndarray:
    """Angle in [0, pi] of a rotation matrix (or stack)."""
    R = np.asarray(R, dtype=float)
    s = 0.5 * np.linalg.norm(unskew(R - np.swapaxes(R, -1, -2)), axis=-1)
    c = 0.5 * (np.trace(R, axis1=-2, axis2=-1) - 1.0)
    return np.arctan2(s, c)


def log_so3(R: np.ndarray) -> np.ndarray:
    """Rotation vector of R.

    Raises:
        DomainError: If the rotation angle is within 1e-6 of pi.
    """
    R = np.asarray(R, dtype=float)
    axis = 0.5 * unskew(R - np.swapaxes(R, -1, -2))
    theta = rotation_angle(R)
    if np.any(theta > np.pi - SMALL_ANGLE):
        raise DomainError(
            f"log is undefined near a half turn (angle {np.max(theta):.9f} rad)"
        )
    small = theta < SMALL_ANGLE
    sin_theta = np.where(small, 1.0, np.sin(theta))
    factor = np.where(small, 1.0 + theta**2 / 6.0, theta / sin_theta)
    return factor[..., None] * axis


def _tangent_so3_inverse(w: np.ndarray) -> np.ndarray:
    """I - W/2 + (1 - (t/2) cot(t/2))/t^2 W^2."""
    w = np.asarray(w, dtype=float)
    theta = np.linalg.norm(w, axis=-1)
    small = theta < SERIES_ANGLE
    t = np.where(small, 1.0, theta)
    t2 = theta**2
    d = np.where(
        small,
        1.0 / 12.0 + t2 / 720.0 + t2**2 / 30240.0,
        (1.0 - 0.5 * t / np.tan(0.5 * t)) / t**2,
    )
    W = skew(w)
    return np.eye(3) - 0.5 * W + d[..., None, None] * (W @ W)


@dataclass(frozen=True)
class Pose:
    """Rigid transformation g = (R, P) acting as x -> R x + P."""

    R: np.ndarray
    P: np.ndarray

    @classmethod
    def identity(cls) -> "Pose":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, M: np.ndarray) -> "Pose":
        M = np.asarray(M, dtype=float)
        return cls(M[:3, :3].copy(), M[:3, 3].copy())

    def as_matrix(self) -> np.ndarray:
        M = np.eye(4)
        M[:3, :3] = self.R
        M[:3, 3] = self.P
        return M

    def compose(self, other: "Pose") -> "Pose":
        return Pose(self.R @ other.R, self.R @ other.P + self.P)

    __matmul__ = compose

    def inverse(self) -> "Pose":
        Rt = self.R.T
        return Pose(Rt, -Rt @ self.P)

    def act(self, x: np.ndarray) -> np.ndarray:
        """Apply the transformation to a point (or stack of points)."""
        return np.asarray(x, dtype=float) @ self.R.T + self.P


def is_rotation(R: np.ndarray, tol: float = 1e-10) -> bool:
    R = np.asarray(R, dtype=float)
    return bool(
        np.allclose(R.T @ R, np.eye(3), atol=tol)
        and abs(np.linalg.det(R) - 1.0) < tol
    )


def hat_se3(t: np.ndarray) -> np.ndarray:
    """4x4 matrix [[skew(w), v], [0, 0]] of a twist."""
    t = np.asarray(t, dtype=float)
    M = np.zeros(t.shape[:-1] + (4, 4))
    M[..., :3, :3] = skew(t[..., 3:])
    M[..., :3, 3] = t[..., :3]
    return M


def vee_se3(M: np.ndarray) -> np.ndarray:
    """Inverse of :func:`hat_se3`.

    Raises:
        StructuralError: If the upper-left block is not skew-symmetric or the
            last row is not zero.
    """
    M = np.asarray(M, dtype=float)
    if M.shape[-2:] != (4, 4):
        raise StructuralError(f"expected a 4x4 matrix, got shape {M.shape}")
    scale = max(1.0, float(np.max(np.abs(M))))
    block = M[..., :3, :3]
    if np.max(np.abs(block + np.swapaxes(block, -1, -2))) > STRUCTURE_TOL * scale:
        raise StructuralError("upper-left 3x3 block is not skew-symmetric")
    if np.max(np.abs(M[..., 3, :])) > STRUCTURE_TOL * scale:
        raise StructuralError("last row of an se(3) matrix must be zero")
    return np.concatenate([M[..., :3, 3], unskew(block)], axis=-1)


def exp_se3_arrays(t: np.ndarray):
    """Batched exponential returning (R, P) arrays."""
    t = np.asarray(t, dtype=float)
    R = exp_so3(t[..., 3:])
    P = np.einsum("...ij,...j->...i", tangent_so3(t[..., 3:]), t[..., :3])
    return R, P


def exp_se3(t: np.ndarray) -> Pose:
    """Exponential map se(3) -> SE(3), (exp(skew(w)), T(w) v)."""
    R, P = exp_se3_arrays(t)
    return Pose(R, P)


def log_se3(g: Pose) -> np.ndarray:
    """Twist whose exponential is g (rotation angle below pi)."""
    w = log_so3(g.R)
    v = _tangent_so3_inverse(w) @ g.P
    return np.concatenate([v, w])


def adjoint_matrix(R: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Batched Ad = [[R, skew(P) R], [0, R]]."""
    R = np.asarray(R, dtype=float)
    out = np.zeros(R.shape[:-2] + (6, 6))
    out[..., :3, :3] = R
    out[..., 3:, 3:] = R
    out[..., :3, 3:] = skew(P) @ R
    return out


def Ad(g: Pose) -> np.ndarray:
    """Adjoint of a pose, mapping twists between frames."""
    return adjoint_matrix(g.R, g.P)


def ad(t: np.ndarray) -> np.ndarray:
    """Lie bracket matrix [[skew(w), skew(v)], [0, skew(w)]]."""
    t = np.asarray(t, dtype=float)
    W = skew(t[..., 3:])
    out = np.zeros(t.shape[:-1] + (6, 6))
    out[..., :3, :3] = W
    out[..., 3:, 3:] = W
    out[..., :3, 3:] = skew(t[..., :3])
    return out


def ad_dual(t: np.ndarray) -> np.ndarray:
    """Co-adjoint operator, the transpose of :func:`ad`."""
    return np.swapaxes(ad(t), -1, -2)


def ad_tilde(wrench: np.ndarray) -> np.ndarray:
    """[[0, skew(n)], [skew(n), skew(m)]] so that ad_tilde(g) @ t == ad_dual(t) @ g."""
    wrench = np.asarray(wrench, dtype=float)
    N = skew(wrench[..., :3])
    out = np.zeros(wrench.shape[:-1] + (6, 6))
    out[..., :3, 3:] = N
    out[..., 3:, :3] = N
    out[..., 3:, 3:] = skew(wrench[..., 3:])
    return out


def dexp_se3(t: np.ndarray) -> np.ndarray:
    """Left-trivialized differential of exp.

    Satisfies (exp(-hat t) D exp(hat t)[hat u])^vee = dexp_se3(t) @ u, i.e. the
    series sum_k (-ad t)^k / (k + 1)!. The series is read off the upper-right
    block of the exponential of [[-ad t, I], [0, 0]].
    """
    t = np.asarray(t, dtype=float)
    block = np.zeros(t.shape[:-1] + (12, 12))
    block[..., :6, :6] = -ad(t)
    block[..., :6, 6:] = np.eye(6)
    return expm(block)[..., :6, 6:]


def orthonormalize(R: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Project rotations back onto SO(3) when their drift exceeds tol."""
    R = np.asarray(R, dtype=float)
    drift = np.max(
        np.abs(np.swapaxes(R, -1, -2) @ R - np.eye(3)), axis=(-2, -1)
    )
    if np.all(drift <= tol):
        return R
    U, _, Vt = np.linalg.svd(R)
    return np.where((drift > tol)[..., None, None], U @ Vt, R)
