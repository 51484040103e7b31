"""Closed-form and rod-model reference solutions for the benchmarks."""

from typing import NamedTuple

import numpy as np
from scipy.integrate import cumulative_trapezoid, solve_bvp

from cosseratshell.errors import ConvergenceError, DomainError
from cosseratshell.mechanics.constitutive import Material, stiffness_blocks


BUCKLED_START = 1.1
MIN_SEED_AMPLITUDE = 0.2


class ElasticaTip(NamedTuple):
    x: float
    deflection: float
    angle: float


class MagnetoElastica(NamedTuple):
    s: np.ndarray
    theta: np.ndarray
    x: np.ndarray
    z: np.ndarray

    @property
    def tip(self) -> np.ndarray:
        return np.array([self.x[-1], self.z[-1]])


def strip_bending_stiffness(material: Material, width: float) -> float:
    """Bending stiffness of a flat strip about its width direction.

    Taken from the shell's own constitutive blocks so that rod oracles and
    shell runs share one modulus.
    """
    D = stiffness_blocks(material, np.eye(2))
    return float(width * D[0, 0, 4, 4])


def elastica_tip(M: float, L: float, EI: float) -> ElasticaTip:
    """Tip of a cantilever bent by an end moment into a circular arc."""
    theta = M * L / EI
    if abs(theta) < 1e-12:
        return ElasticaTip(L, 0.0, 0.0)
    return ElasticaTip(L * np.sin(theta) / theta, L * (1.0 - np.cos(theta)) / theta, theta)


def cantilever_tip_deflection(P: float, L: float, EI: float) -> float:
    """Linear tip deflection PL^3 / 3EI."""
    return P * L**3 / (3.0 * EI)


def _first_mode(s: np.ndarray, L: float, EI: float, amplitude: float) -> np.ndarray:
    """State (theta, M, x, z) of the clamped-free first buckling mode."""
    arg = 0.5 * np.pi * s / L
    theta = amplitude * np.sin(arg)
    moment = EI * amplitude * 0.5 * np.pi / L * np.cos(arg)
    x = cumulative_trapezoid(np.cos(theta), s, initial=0.0)
    z = cumulative_trapezoid(np.sin(theta), s, initial=0.0)
    return np.vstack([theta, moment, x, z])


def magneto_elastica(
    L: float,
    EI: float,
    q: float,
    antiparallel: bool = False,
    tilt: float = 1e-3,
    nodes: int = 101,
    continuation: int = 20,
) -> MagnetoElastica:
    """Planar inextensible rod loaded by a uniform magnetization couple.

    The rod is clamped at s = 0 and magnetized along its tangent. The field
    points along +z, or along -x tilted by ``tilt`` towards +z when
    ``antiparallel``. With field angle phi measured from the x axis the
    equilibrium reads

        theta' = M / EI,  M' = -q sin(phi - theta),  x' = cos theta,  z' = sin theta

    with theta(0) = x(0) = z(0) = 0 and M(L) = 0. The couple magnitude q is
    reached by continuation. Above the critical couple pi^2 EI / 4L^2 of the
    antiparallel case the straight rod is unstable; the continuation then
    starts on the buckled branch just past the critical couple, seeded with
    the first mode at the amplitude of the elastica expansion
    q / q_cr = 1 + theta(L)^2 / 8.

    Args:
        L: Rod length.
        EI: Bending stiffness.
        q: Couple per unit length, |B^r| |B^a| A / mu0.
        antiparallel: Field opposes the magnetization.
        tilt: Field tilt in the antiparallel case, radians.
        nodes: Mesh size of the collocation grid.
        continuation: Number of load increments.

    Raises:
        DomainError: For non-positive length or stiffness.
        ConvergenceError: If the collocation solver fails at some increment.
    """
    if L <= 0 or EI <= 0:
        raise DomainError(f"length and stiffness must be positive, got L={L}, EI={EI}")
    phi = np.pi - tilt if antiparallel else 0.5 * np.pi

    s = np.linspace(0.0, L, nodes)
    y = np.zeros((4, nodes))
    y[2] = s
    loads = q * np.arange(1, continuation + 1) / continuation
    q_critical = 0.25 * np.pi**2 * EI / L**2
    if antiparallel and q > q_critical:
        start = min(BUCKLED_START * q_critical, q)
        amplitude = max(np.sqrt(8.0 * (start / q_critical - 1.0)), MIN_SEED_AMPLITUDE)
        y = _first_mode(s, L, EI, amplitude)
        loads = np.linspace(start, q, continuation)

    def boundary(ya, yb):
        return np.array([ya[0], yb[1], ya[2], ya[3]])

    for load in loads:
        def rhs(_, y, load=load):
            return np.vstack(
                [y[1] / EI, -load * np.sin(phi - y[0]), np.cos(y[0]), np.sin(y[0])]
            )

        sol = solve_bvp(rhs, boundary, s, y, tol=1e-8, max_nodes=100000)
        if sol.status != 0:
            raise ConvergenceError(f"magneto-elastica failed at q={load:.6g}: {sol.message}")
        y = sol.sol(s)
    return MagnetoElastica(s, y[0], y[2], y[3])
