"""Pointwise balance law of the shell, used as a verification oracle.

For a flat, unit-jacobian chart the local equilibrium reads

    sum_a dS^a/dxi^a - sum_a ad*(zeta_a) S^a + F_bar = 0

with S^a the stress wrenches and F_bar the external wrench per unit area.
"""

from typing import Callable, Optional

import numpy as np

from cosseratshell.kinematics.liegroup import ad_dual
from cosseratshell.kinematics.surface import ParamPoint


def strong_form_residual(
    zeta_field: Callable[[float, float], np.ndarray],
    stress_field: Callable[[float, float], np.ndarray],
    point: ParamPoint,
    F_bar: Optional[np.ndarray] = None,
    step: float = 1e-5,
) -> np.ndarray:
    """Balance-law residual at a chart point by central differences.

    Args:
        zeta_field: Current twists (6x2) as a function of the chart point.
        stress_field: Stress wrenches (6x2) as a function of the chart point.
        point: Evaluation point.
        F_bar: External wrench per unit area, zero when omitted.
        step: Difference step for the divergence.

    Returns:
        Residual wrench (6,).
    """
    xi = np.array(point, dtype=float)
    residual = np.zeros(6) if F_bar is None else np.array(F_bar, dtype=float)
    zeta = zeta_field(*xi)
    S = stress_field(*xi)
    for alpha in range(2):
        offset = np.zeros(2)
        offset[alpha] = step
        dS = stress_field(*(xi + offset))[:, alpha] - stress_field(*(xi - offset))[:, alpha]
        residual += dS / (2.0 * step) - ad_dual(zeta[:, alpha]) @ S[:, alpha]
    return residual
