"""
Thinness sweep for the pure-bending cantilever.
Rolls a strip to a quarter turn at several thickness ratios and reports the
tip rotation error for each integration variant.
"""

import argparse
import logging
from itertools import product

import numpy as np
import pandas as pd
from dotenv import load_dotenv

from cosseratshell.bench.oracles import strip_bending_stiffness
from cosseratshell.errors import ConvergenceError
from cosseratshell.fem.mesh import build_mesh
from cosseratshell.kinematics.surface import FlatPlate
from cosseratshell.mechanics.constitutive import Material
from cosseratshell.solver.diagnostics import accumulated_rotation
from cosseratshell.solver.newton import SolverSettings, run

logging.basicConfig(level=logging.WARNING)
load_dotenv()


def quarter_turn(ratio: float, elements: int, ad_mode: str, integration: str) -> dict:
    """Tip rotation of a follower-moment cantilever aimed at pi/2."""
    length, width = 1.0, 0.1
    material = Material(E=1e6, nu=0.0, h=ratio * length)
    EI = strip_bending_stiffness(material, width)
    mesh = build_mesh(FlatPlate(length, width), elements, 1, material, ad_mode, integration)
    mesh.clamp(mesh.edge_nodes("root"))
    for node in mesh.edge_nodes("tip"):
        mesh.add_load(node, [0, 0, 0, 0, 0.25 * np.pi * EI / length, 0], "follower")

    row = {"h_over_L": ratio, "ad_mode": ad_mode, "integration": integration}
    try:
        report = run(mesh, SolverSettings(load_steps=4))
    except ConvergenceError as exc:
        logging.warning(f"h/L={ratio} {ad_mode}/{integration}: {exc}")
        return {**row, "rotation_error": np.nan, "iterations": np.nan}
    rotation = accumulated_rotation(mesh, mesh.edge_nodes("bottom"))
    return {
        **row,
        "rotation_error": abs(rotation - 0.5 * np.pi) / (0.5 * np.pi),
        "iterations": sum(report.iterations),
    }


def sweep(ratios, elements: int) -> pd.DataFrame:
    rows = [
        quarter_turn(ratio, elements, ad_mode, integration)
        for ratio, ad_mode, integration in product(
            ratios, ("centroid", "gauss"), ("full", "selective")
        )
    ]
    return pd.DataFrame(rows)


def parse_args():
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(description="Tip rotation error against thickness ratio")

    parser.add_argument(
        "--ratios",
        type=float,
        nargs="+",
        default=[1e-1, 1e-2, 1e-3, 1e-4],
        help="Thickness to length ratios (default: %(default)s)",
    )

    parser.add_argument(
        "--elements",
        type=int,
        default=100,
        help="Elements along the strip (default: %(default)s)",
    )

    parser.add_argument(
        "--output",
        default="locking_sweep.csv",
        help="Output CSV path (default: %(default)s)",
    )

    return parser.parse_args()


if __name__ == "__main__":
    args = parse_args()
    frame = sweep(args.ratios, args.elements)
    frame.to_csv(args.output, index=False)
    print(frame.to_string(index=False))
