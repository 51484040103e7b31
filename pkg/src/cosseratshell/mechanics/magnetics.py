"""Hard-magnetic body couples.

The remanent field is frozen in the material and rotates with the local
frame, B_t^r = R_t R_0^T B_0^r. A spatially constant applied field B^a exerts
no body force, only the couple m = (1/mu0) B_t^r x B^a per unit reference
area. Element routines below work on stacks: a leading element axis, then
the evaluation-point axis.
"""

from dataclasses import dataclass

import numpy as np

from cosseratshell.errors import DomainError
from cosseratshell.kinematics.liegroup import skew

MU0 = 4e-7 * np.pi


@dataclass(frozen=True)
class MagneticEnvironment:
    """Spatially constant applied field (tesla) and vacuum permeability."""

    B_applied: np.ndarray
    mu0: float = MU0

    def __post_init__(self):
        object.__setattr__(self, "B_applied", np.asarray(self.B_applied, dtype=float))
        if self.B_applied.shape != (3,):
            raise DomainError(f"applied field must be a 3-vector, got {self.B_applied.shape}")
        if not self.mu0 > 0:
            raise DomainError(f"mu0 must be positive, got {self.mu0}")

    def scaled(self, factor: float) -> "MagneticEnvironment":
        return MagneticEnvironment(factor * self.B_applied, self.mu0)


def rotated_remanent(R_t: np.ndarray, R_0: np.ndarray, B_r0: np.ndarray) -> np.ndarray:
    """B_t^r = R_t R_0^T B_0^r."""
    local = np.einsum("...ji,...j->...i", R_0, B_r0)
    return np.einsum("...ij,...j->...i", R_t, local)


def magnetic_couple(B_rt: np.ndarray, env: MagneticEnvironment) -> np.ndarray:
    """Couple per unit reference area in the inertial frame."""
    return np.cross(B_rt, env.B_applied) / env.mu0


def magnetic_potential(
    R_t: np.ndarray, R_0: np.ndarray, B_r0: np.ndarray, env: MagneticEnvironment
) -> np.ndarray:
    """Stored magnetic energy per unit area, -(1/mu0) B_t^r . B^a."""
    return -rotated_remanent(R_t, R_0, B_r0) @ env.B_applied / env.mu0


def _local_fields(R_t, R_0, B_r0, env):
    # remanent and applied fields in the current local frame at each point
    b_r = np.einsum("...qji,...j->...qi", R_0, B_r0)
    b_a = np.einsum("...qji,j->...qi", R_t, env.B_applied)
    return b_r, b_a


def element_magnetic_force(
    N: np.ndarray,
    weights: np.ndarray,
    R_t: np.ndarray,
    R_0: np.ndarray,
    B_r0: np.ndarray,
    env: MagneticEnvironment,
) -> np.ndarray:
    """Nodal magnetic wrenches of one or more elements.

    Args:
        N: Shape function values, shape (..., Q, 4).
        weights: Quadrature weights including the area element, shape (..., Q).
        R_t: Current rotations at the evaluation points, shape (..., Q, 3, 3).
        R_0: Reference rotations at the evaluation points, shape (..., Q, 3, 3).
        B_r0: Remanent field per element in the inertial frame, shape (..., 3).
        env: Applied field.

    Returns:
        Wrenches of shape (..., 4, 6) with zero force parts.
    """
    b_r, b_a = _local_fields(R_t, R_0, B_r0, env)
    couple = np.cross(b_r, b_a) / env.mu0
    out = np.zeros(np.shape(N)[:-2] + (4, 6))
    out[..., 3:] = np.einsum("...q,...qi,...qk->...ik", weights, N, couple)
    return out


def element_magnetic_stiffness(
    N: np.ndarray,
    weights: np.ndarray,
    R_t: np.ndarray,
    R_0: np.ndarray,
    B_r0: np.ndarray,
    env: MagneticEnvironment,
) -> np.ndarray:
    """Derivative of :func:`element_magnetic_force` under g -> g exp(eta).

    Returns:
        Blocks of shape (..., 4, 4, 6, 6); only the rotation-rotation 3x3
        sub-blocks are nonzero.
    """
    b_r, b_a = _local_fields(R_t, R_0, B_r0, env)
    product = skew(b_r) @ skew(b_a) / env.mu0
    out = np.zeros(np.shape(N)[:-2] + (4, 4, 6, 6))
    out[..., 3:, 3:] = np.einsum("...q,...qi,...qj,...qab->...ijab", weights, N, N, product)
    return out
