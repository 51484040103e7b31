"""Linear isotropic Cosserat shell law.

Strains and stresses are 6x2 matrices whose columns are the per-direction
twists E_alpha and wrenches S^alpha. Stiffness blocks are stored as an
array D[alpha, beta] of 6x6 matrices; leading axes broadcast so one call
covers every evaluation point of a mesh.
"""

from dataclasses import dataclass

import numpy as np

from cosseratshell.errors import DomainError

MODULUS_SLOPE = 2.5
CROWDING = 1.35


@dataclass(frozen=True)
class Material:
    """Young's modulus E, Poisson ratio nu and thickness h (SI units)."""

    E: float
    nu: float
    h: float

    def __post_init__(self):
        if not self.E > 0:
            raise DomainError(f"Young's modulus must be positive, got {self.E}")
        if not -1.0 < self.nu < 0.5:
            raise DomainError(f"Poisson ratio must lie in (-1, 0.5), got {self.nu}")
        if not self.h > 0:
            raise DomainError(f"thickness must be positive, got {self.h}")

    @classmethod
    def from_lame(cls, mu: float, lam: float, h: float) -> "Material":
        """Build from Lame parameters: E = mu(3 lam + 2 mu)/(lam + mu), nu = lam / 2(lam + mu)."""
        if mu <= 0 or lam + mu <= 0:
            raise DomainError(f"invalid Lame parameters mu={mu}, lambda={lam}")
        E = mu * (3.0 * lam + 2.0 * mu) / (lam + mu)
        nu = lam / (2.0 * (lam + mu))
        return cls(E=E, nu=nu, h=h)

    @property
    def membrane_modulus(self) -> float:
        return self.E * self.h / (1.0 - self.nu**2)


def h_tensor(Ainv: np.ndarray, nu: float) -> np.ndarray:
    """H^{abgr} = nu A^{ab} A^{gr} + (1 - nu) A^{ag} A^{br}, shape (..., 2, 2, 2, 2)."""
    Ainv = np.asarray(Ainv, dtype=float)
    return nu * np.einsum("...ab,...gr->...abgr", Ainv, Ainv) + (1.0 - nu) * np.einsum(
        "...ag,...br->...abgr", Ainv, Ainv
    )


def stiffness_blocks(mat: Material, Ainv: np.ndarray) -> np.ndarray:
    """Blocks D^{ab} = E h / (1 - nu^2) blockdiag(D1^{ab}, h^2/12 D2^{ab}).

    The in-plane 2x2 parts read D^{ab}[i, j] = H^{a i b j}; the third
    diagonal entries are (1 - nu)/2 A^{ab} (membrane) and (1 - nu) A^{ab}
    (bending).

    Returns:
        Array of shape (..., 2, 2, 6, 6) indexed [alpha, beta, row, col].
    """
    Ainv = np.asarray(Ainv, dtype=float)
    H = h_tensor(Ainv, mat.nu)
    inplane = np.swapaxes(H, -3, -2)
    D = np.zeros(Ainv.shape[:-2] + (2, 2, 6, 6))
    bending = mat.h**2 / 12.0
    D[..., :2, :2] = inplane
    D[..., 2, 2] = 0.5 * (1.0 - mat.nu) * Ainv
    D[..., 3:5, 3:5] = bending * inplane
    D[..., 5, 5] = bending * (1.0 - mat.nu) * Ainv
    return mat.membrane_modulus * D


def stacked_operator(D: np.ndarray) -> np.ndarray:
    """Assemble the blocks into the 12x12 operator [[D11, D12], [D21, D22]]."""
    D = np.asarray(D, dtype=float)
    return np.swapaxes(D, -3, -2).reshape(D.shape[:-4] + (12, 12))


def stress(D: np.ndarray, E: np.ndarray) -> np.ndarray:
    """S^a = sum_b D^{ab} E_b, returned as a 6x2 matrix (or stack)."""
    return np.einsum("...abij,...jb->...ia", D, E)


def internal_energy_density(S: np.ndarray, E: np.ndarray) -> np.ndarray:
    """l0 = -1/2 sum_a <S^a, E_a>; non-positive for admissible materials."""
    return -0.5 * np.sum(np.asarray(S) * np.asarray(E), axis=(-2, -1))


def magnetic_modulus(E0: float, phi: float) -> float:
    """Modulus of a particle-filled elastomer, E0 exp(2.5 phi / (1 - 1.35 phi)).

    Raises:
        DomainError: If phi is outside [0, 1/1.35).
    """
    if not 0.0 <= phi < 1.0 / CROWDING:
        raise DomainError(f"volume fraction must lie in [0, {1 / CROWDING:.4f}), got {phi}")
    return E0 * float(np.exp(MODULUS_SLOPE * phi / (1.0 - CROWDING * phi)))
