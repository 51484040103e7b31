"""Element residuals and tangents of the discrete weak form.

All elements are processed at once. For every evaluation point p the
strain operator is

    B_p = [dN^i_alpha(p) I + N^i(p) ad(zeta_alpha)]   (12 x 24, alpha-major rows)

In the default "centroid" mode zeta is the element-centroid twist and the
strain is evaluated at the centroid only: the stress D (zeta_c - zeta_0c)
is held constant over the element and integrated with the element area.
Odd-in-xi parasitic shear and membrane strains of the bilinear field vanish
at the centroid, so thin shells do not lock in bending, and a clamped edge
removes the global hourglass patterns.

The diagnostic "gauss" mode uses the twist at each Gauss point for both
strain and operator. There selective integration moves the in-plane
membrane shear couplings of D from the Gauss points to the centroid.

The tangents are the exact derivatives of f_int under the multiplicative
update g -> g exp(eta) with the twist update rule of the solver. Kmat is the
symmetric part built from B_p; Kgeo collects the stress-dependent terms.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from cosseratshell.fem.mesh import ShellMesh
from cosseratshell.fem.shape import CENTROID, GAUSS_SLICE
from cosseratshell.kinematics.liegroup import ad, ad_tilde
from cosseratshell.mechanics.constitutive import stacked_operator
from cosseratshell.mechanics.magnetics import (
    MagneticEnvironment,
    element_magnetic_force,
    element_magnetic_stiffness,
    magnetic_potential,
)

# stacked strain indices of the in-plane shear components (alpha=1, row 2) and (alpha=2, row 1)
INPLANE_SHEAR = (1, 6)
# transverse shear v3 of E_1 and E_2
TRANSVERSE_SHEAR = (2, 8)


@dataclass
class ElementKernelOutput:
    """Per-element blocks, leading axis over elements."""

    Kmat: np.ndarray
    Kgeo: np.ndarray
    Kmag: np.ndarray
    f_int: np.ndarray
    f_ext: np.ndarray
    f_mag: np.ndarray


def strain_operators(N: np.ndarray, dN: np.ndarray, zeta: np.ndarray) -> np.ndarray:
    """Stacked K-bar operators, shape (..., 12, 24)."""
    adz = ad(np.swapaxes(zeta, -1, -2))
    B = np.einsum("...ia,rc->...aric", dN, np.eye(6)) + np.einsum(
        "...i,...arc->...aric", N, adz
    )
    return B.reshape(B.shape[:-4] + (12, 24))


def stacked_strain(mesh: ShellMesh) -> np.ndarray:
    """Strain at every evaluation point as alpha-major 12-vectors."""
    E = mesh.zeta - mesh.zeta0
    return np.swapaxes(E, -1, -2).reshape(E.shape[:-2] + (12,))


def effective_stiffness(mesh: ShellMesh) -> np.ndarray:
    """12x12 operators per evaluation point with the integration split applied.

    Centroid mode keeps D at the centroid only. In gauss mode full
    integration puts nothing at the centroid, and selective integration
    moves the in-plane shear couplings from the Gauss points to the centroid.
    """
    D = stacked_operator(mesh.blocks)
    Deff = D.copy()
    if mesh.ad_mode == "centroid":
        Deff[:, GAUSS_SLICE] = 0.0
        return Deff
    if mesh.integration == "full":
        Deff[:, CENTROID] = 0.0
        return Deff
    mask = np.zeros((12, 12), dtype=bool)
    mask[np.ix_(INPLANE_SHEAR, INPLANE_SHEAR)] = True
    Deff[:, CENTROID] = np.where(mask, D[:, CENTROID], 0.0)
    Deff[:, GAUSS_SLICE] = np.where(mask, 0.0, D[:, GAUSS_SLICE])
    return Deff


def element_stresses(mesh: ShellMesh) -> np.ndarray:
    """Stacked stresses s_p = Deff_p e_p, shape (n_elements, 5, 12)."""
    return np.einsum("epkl,epl->epk", effective_stiffness(mesh), stacked_strain(mesh))


def element_kernels(
    mesh: ShellMesh,
    env: Optional[MagneticEnvironment] = None,
    load_factor: float = 1.0,
) -> ElementKernelOutput:
    """Residual vectors and tangent blocks of every element.

    Args:
        mesh: Mesh with current twists and rotations.
        env: Applied magnetic field, already scaled to the current load level.
        load_factor: Scale of the follower area wrench.

    Returns:
        ElementKernelOutput with (n_elements, 24, 24) matrices and
        (n_elements, 24) vectors.
    """
    n_el = mesh.n_elements
    W, N, dN = mesh.weights, mesh.N, mesh.dN
    zeta = mesh.zeta
    if mesh.ad_mode == "centroid":
        zeta = np.broadcast_to(zeta[:, CENTROID : CENTROID + 1], zeta.shape)

    B = strain_operators(N, dN, zeta)
    Deff = effective_stiffness(mesh)
    s = element_stresses(mesh)

    f_int = np.einsum("ep,epki,epk->ei", W, B, s, optimize=True)
    Kmat = np.einsum("ep,epki,epkj->eij", W, B, Deff @ B, optimize=True)

    # B_p^T s_p varies with the twist inside ad(zeta); its derivative is ad~(s) B
    adt = ad_tilde(s.reshape(n_el, 5, 2, 6))
    T = np.einsum("epakl,epalc->epkc", adt, B.reshape(n_el, 5, 2, 6, 24), optimize=True)
    Kgeo = np.einsum("ep,epi,epkc->eikc", W, N, T, optimize=True).reshape(n_el, 24, 24)

    area = load_factor * mesh.area_wrench
    f_ext = np.einsum(
        "eq,eqi,k->eik", W[:, GAUSS_SLICE], N[:, GAUSS_SLICE], area
    ).reshape(n_el, 24)

    if env is None or not np.any(env.B_applied):
        f_mag = np.zeros((n_el, 24))
        Kmag = np.zeros((n_el, 24, 24))
    else:
        args = (
            N[:, GAUSS_SLICE],
            W[:, GAUSS_SLICE],
            mesh.point_R[:, GAUSS_SLICE],
            mesh.point_R0[:, GAUSS_SLICE],
            mesh.remanent,
            env,
        )
        f_mag = element_magnetic_force(*args).reshape(n_el, 24)
        Kmag = np.swapaxes(element_magnetic_stiffness(*args), 2, 3).reshape(n_el, 24, 24)

    return ElementKernelOutput(Kmat, Kgeo, Kmag, f_int, f_ext, f_mag)


def elastic_energy(mesh: ShellMesh) -> float:
    """Stored elastic energy, the integral of -l0 over the mesh."""
    return float(
        0.5 * np.einsum("ep,epk,epk->", mesh.weights, element_stresses(mesh), stacked_strain(mesh))
    )


def magnetic_energy(mesh: ShellMesh, env: Optional[MagneticEnvironment]) -> float:
    """Magnetic potential energy integrated over the Gauss points."""
    if env is None:
        return 0.0
    B_r0 = np.broadcast_to(mesh.remanent[:, None, :], (mesh.n_elements, 4, 3))
    density = magnetic_potential(
        mesh.point_R[:, GAUSS_SLICE], mesh.point_R0[:, GAUSS_SLICE], B_r0, env
    )
    return float(np.sum(mesh.weights[:, GAUSS_SLICE] * density))
