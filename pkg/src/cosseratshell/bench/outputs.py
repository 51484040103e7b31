"""Run artifacts: load-deflection CSV, mesh dumps and the solve report."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd

from cosseratshell.fem.mesh import ShellMesh, write_mesh_dump
from cosseratshell.solver.diagnostics import accumulated_rotation, tip_displacement
from cosseratshell.solver.newton import SolveReport, StepRecord

CSV_COLUMNS = [
    "step",
    "load_factor",
    "load",
    "tip_ux",
    "tip_uy",
    "tip_uz",
    "tip_rotation",
    "iterations",
]


@dataclass
class RunOutputs:
    out_dir: Path
    csv_path: Optional[Path] = None
    report_path: Optional[Path] = None
    mesh_dumps: List[Path] = field(default_factory=list)
    report: Optional[SolveReport] = None

    @property
    def converged(self) -> bool:
        return self.report is not None and self.report.converged


def emit_deformed_geometry(mesh: ShellMesh, path) -> Path:
    """Mesh dump followed by a ``# triangles <count>`` block, two per quad."""
    path = write_mesh_dump(mesh, path)
    quads = mesh.elements
    triangles = np.concatenate([quads[:, [0, 1, 2]], quads[:, [0, 2, 3]]])
    lines = [f"# triangles {len(triangles)}"]
    lines.extend(f"{t} {a} {b} {c}" for t, (a, b, c) in enumerate(triangles))
    with open(path, "a") as f:
        f.write("\n".join(lines) + "\n")
    return path


class LoadDeflectionRecorder:
    """Step callback for ``solver.newton.run`` collecting CSV rows and dumps."""

    def __init__(
        self,
        reference_load: float,
        mesh_dir: Optional[Path] = None,
        dumps: str = "final",
        load_steps: int = 1,
    ):
        self.reference_load = reference_load
        self.mesh_dir = Path(mesh_dir) if mesh_dir is not None else None
        self.dumps = dumps
        self.load_steps = load_steps
        self.rows: List[dict] = []
        self.mesh_dumps: List[Path] = []

    def __call__(self, step: int, load_factor: float, mesh: ShellMesh, record: Optional[StepRecord]):
        u = tip_displacement(mesh)
        self.rows.append(
            {
                "step": step,
                "load_factor": load_factor,
                "load": load_factor * self.reference_load,
                "tip_ux": u[0],
                "tip_uy": u[1],
                "tip_uz": u[2],
                "tip_rotation": accumulated_rotation(mesh, mesh.edge_nodes("bottom")),
                "iterations": 0 if record is None else record.iterations,
            }
        )
        wanted = self.dumps == "all" or (self.dumps == "final" and step == self.load_steps)
        if self.mesh_dir is not None and wanted:
            self.mesh_dumps.append(
                emit_deformed_geometry(mesh, self.mesh_dir / f"step_{step:04d}.txt")
            )

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=CSV_COLUMNS)

    def write_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.12e")
        return path
