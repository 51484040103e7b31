"""Scenario files: parsing, validation and problem construction.

Scenarios are INI files read with ``configparser``. Quantities may carry a
unit suffix and are converted to SI; vectors are comma separated with an
optional trailing unit (``remanent = 0.143, 0, 0 T``). Every error names the
offending key and its line. See ``docs/scenario_schema.md`` for the schema.
"""

import configparser
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from cosseratshell.errors import DomainError, MeshError, ScenarioError
from cosseratshell.fem.mesh import ShellMesh, build_mesh
from cosseratshell.kinematics.liegroup import Pose, exp_so3
from cosseratshell.kinematics.surface import (
    CylindricalArch,
    FlatPlate,
    ReferenceSurface,
    RigidlyMovedSurface,
)
from cosseratshell.mechanics.constitutive import Material, magnetic_modulus
from cosseratshell.mechanics.magnetics import MU0, MagneticEnvironment
from cosseratshell.solver.newton import SolverSettings

SCENARIO_DIR = Path(__file__).parent / "scenarios"

UNITS: Dict[str, Dict[str, float]] = {
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3},
    "pressure": {"Pa": 1.0, "kPa": 1e3, "MPa": 1e6, "GPa": 1e9},
    "field": {"T": 1.0, "mT": 1e-3},
    "force": {"N": 1.0, "kN": 1e3},
    "moment": {"N*m": 1.0, "N.m": 1.0, "Nm": 1.0},
    "angle": {"rad": 1.0, "deg": np.pi / 180.0},
    "permeability": {"T*m/A": 1.0, "H/m": 1.0},
    "dimensionless": {},
}

GEOMETRIES = ("flat", "arch", "gripper")
LOAD_TYPES = ("end_moment", "end_shear", "torsion", "drilling", "follower_edge", "magnetic")
# local direction, wrench part (0 force, 3 moment), default frame, magnitude kind
LOAD_DEFAULTS = {
    "end_moment": ((0.0, 1.0, 0.0), 3, "follower", "moment"),
    "torsion": ((1.0, 0.0, 0.0), 3, "follower", "moment"),
    "drilling": ((0.0, 0.0, 1.0), 3, "follower", "moment"),
    "end_shear": ((0.0, 0.0, 1.0), 0, "dead", "force"),
    "follower_edge": ((1.0, 0.0, 0.0), 0, "follower", "force"),
    "magnetic": (None, None, None, "field"),
}

SCHEMA = {
    "scenario": {"name": "str", "description": "str"},
    "geometry": {
        "type": ("choice", GEOMETRIES),
        "length": "length",
        "width": "length",
        "radius": "length",
        "angle_span": "angle",
        "fingers": "int",
        "hub": "length",
    },
    "material": {
        "E": "pressure",
        "E0": "pressure",
        "modulus_factor": "dimensionless",
        "volume_fraction": "dimensionless",
        "nu": "dimensionless",
        "mu": "pressure",
        "lambda": "pressure",
        "h": "length",
    },
    "mesh": {
        "nx": "int",
        "ny": "int",
        "ad_mode": ("choice", ("centroid", "gauss")),
        "integration": ("choice", ("full", "selective")),
    },
    "magnetic": {
        "remanent": "vector:field",
        "remanent_basis": ("choice", ("surface", "volume")),
        "applied": "vector:field",
        "mu0": "permeability",
    },
    "solver": {
        "load_steps": "int",
        "max_iters": "int",
        "tol_residual": "force",
        "tol_relative": "dimensionless",
        "damping": "dimensionless",
        "linear_solver": ("choice", ("auto", "dense", "sparse")),
    },
    "output": {"mesh_dumps": ("choice", ("all", "final", "none"))},
    "target": {"end_rotation": "angle", "tolerance": "dimensionless"},
}
LOAD_SCHEMA = {
    "type": ("choice", LOAD_TYPES),
    "magnitude": "load",
    "direction": "vector:dimensionless",
    "frame": ("choice", ("follower", "dead")),
}

_SECTION = re.compile(r"^\s*\[([^\]]+)\]")
_KEY = re.compile(r"^\s*([^=:#;\s][^=:]*?)\s*[=:]")


@dataclass
class GeometryConfig:
    kind: str
    length: float = 0.0
    width: float = 0.0
    radius: float = 0.0
    angle_span: float = np.pi
    fingers: int = 4
    hub: float = 0.0


@dataclass
class LoadConfig:
    label: str
    kind: str
    magnitude: Optional[float] = None
    direction: Optional[np.ndarray] = None
    frame: Optional[str] = None


@dataclass
class MagneticConfig:
    remanent: np.ndarray
    applied: np.ndarray
    remanent_basis: str = "surface"
    mu0: float = MU0


@dataclass
class ScenarioConfig:
    name: str
    geometry: GeometryConfig
    material: Material
    nx: int
    ny: int
    loads: List[LoadConfig] = field(default_factory=list)
    magnetic: Optional[MagneticConfig] = None
    solver: SolverSettings = field(default_factory=SolverSettings)
    ad_mode: str = "centroid"
    integration: str = "full"
    mesh_dumps: str = "final"
    target_rotation: Optional[float] = None
    target_tolerance: float = 0.01
    description: str = ""
    source: Optional[Path] = None


def _line_map(text: str) -> Dict[Tuple[str, Optional[str]], int]:
    """1-based line numbers of section headers and keys."""
    lines: Dict[Tuple[str, Optional[str]], int] = {}
    section = None
    for number, raw in enumerate(text.splitlines(), 1):
        stripped = raw.strip()
        if not stripped or stripped[0] in "#;":
            continue
        match = _SECTION.match(raw)
        if match:
            section = match.group(1).strip()
            lines[(section, None)] = number
            continue
        match = _KEY.match(raw)
        if match and section is not None:
            lines.setdefault((section, match.group(1).strip()), number)
    return lines


def _unit_kind(unit: str) -> Optional[str]:
    for kind, table in UNITS.items():
        if unit in table:
            return kind
    return None


def parse_quantity(text: str, kind: str, key: str = None, line: int = None):
    """Parse a scalar or comma-separated vector with an optional unit suffix."""
    tokens = text.replace(",", " ").split()
    if not tokens:
        raise ScenarioError("empty value", key, line)
    unit = None
    try:
        float(tokens[-1])
    except ValueError:
        unit = tokens.pop()
    try:
        values = np.array([float(t) for t in tokens])
    except ValueError:
        raise ScenarioError(f"'{text}' is not numeric", key, line) from None
    if unit is not None:
        table = UNITS[kind]
        if unit not in table:
            found = _unit_kind(unit)
            if found is None:
                raise ScenarioError(f"unknown unit '{unit}'", key, line)
            raise ScenarioError(
                f"unit mismatch: '{unit}' is a {found} unit, expected {kind}", key, line
            )
        values = values * table[unit]
    return values


class _Reader:
    """configparser wrapper that converts values and reports key and line."""

    def __init__(self, path: Path):
        self.path = Path(path)
        text = self.path.read_text()
        self.lines = _line_map(text)
        self.parser = configparser.ConfigParser(
            interpolation=None, inline_comment_prefixes=("#", ";")
        )
        self.parser.optionxform = str
        try:
            self.parser.read_string(text, source=str(self.path))
        except configparser.Error as exc:
            raise ScenarioError(f"malformed scenario file: {exc}", line=getattr(exc, "lineno", None)) from exc

    def line(self, section: str, key: Optional[str] = None) -> Optional[int]:
        return self.lines.get((section, key))

    def check_keys(self, section: str, schema: dict):
        for key in self.parser[section]:
            if key not in schema:
                raise ScenarioError(f"unknown key in [{section}]", key, self.line(section, key))

    def has(self, section: str, key: str) -> bool:
        return self.parser.has_option(section, key)

    def raw(self, section: str, key: str) -> str:
        return self.parser[section][key]

    def get(self, section: str, key: str, kind, default=None, required: bool = False):
        if not self.has(section, key):
            if required:
                raise ScenarioError(
                    f"missing required key in [{section}]", key, self.line(section)
                )
            return default
        text = self.raw(section, key)
        line = self.line(section, key)
        if kind == "str":
            return text.strip()
        if kind == "int":
            try:
                return int(text)
            except ValueError:
                raise ScenarioError(f"'{text}' is not an integer", key, line) from None
        if isinstance(kind, tuple):
            value = text.strip()
            if value not in kind[1]:
                raise ScenarioError(f"'{value}' is not one of {kind[1]}", key, line)
            return value
        if kind.startswith("vector:"):
            values = parse_quantity(text, kind.split(":", 1)[1], key, line)
            if values.shape != (3,):
                raise ScenarioError(f"expected 3 components, got {values.size}", key, line)
            return values
        values = parse_quantity(text, kind, key, line)
        if values.size != 1:
            raise ScenarioError(f"expected a scalar, got {values.size} values", key, line)
        return float(values[0])


def _read_material(reader: _Reader) -> Material:
    section = "material"
    kinds = SCHEMA[section]
    h = reader.get(section, "h", kinds["h"], required=True)
    try:
        if reader.has(section, "mu") or reader.has(section, "lambda"):
            mu = reader.get(section, "mu", kinds["mu"], required=True)
            lam = reader.get(section, "lambda", kinds["lambda"], required=True)
            return Material.from_lame(mu, lam, h)
        nu = reader.get(section, "nu", kinds["nu"], required=True)
        if reader.has(section, "E0"):
            E0 = reader.get(section, "E0", kinds["E0"])
            if reader.has(section, "modulus_factor"):
                E = E0 * reader.get(section, "modulus_factor", kinds["modulus_factor"])
            else:
                phi = reader.get(section, "volume_fraction", kinds["volume_fraction"], required=True)
                E = magnetic_modulus(E0, phi)
        else:
            E = reader.get(section, "E", kinds["E"], required=True)
        return Material(E=E, nu=nu, h=h)
    except DomainError as exc:
        raise ScenarioError(str(exc), line=reader.line(section)) from exc


def _read_geometry(reader: _Reader) -> GeometryConfig:
    section = "geometry"
    kinds = SCHEMA[section]
    kind = reader.get(section, "type", kinds["type"], required=True)
    required = {
        "flat": ("length", "width"),
        "arch": ("radius", "width"),
        "gripper": ("length", "width"),
    }[kind]
    values = {k: reader.get(section, k, kinds[k], required=True) for k in required}
    for key, value in values.items():
        if value <= 0:
            raise ScenarioError("must be positive", key, reader.line(section, key))
    geometry = GeometryConfig(kind=kind, **values)
    geometry.angle_span = reader.get(section, "angle_span", kinds["angle_span"], np.pi)
    geometry.fingers = reader.get(section, "fingers", kinds["fingers"], 4)
    geometry.hub = reader.get(section, "hub", kinds["hub"], 0.0)
    if kind == "arch" and not 0 < geometry.angle_span <= 2 * np.pi + 1e-12:
        raise ScenarioError("must lie in (0, 2 pi]", "angle_span", reader.line(section, "angle_span"))
    if kind == "gripper" and geometry.fingers < 1:
        raise ScenarioError("must be at least 1", "fingers", reader.line(section, "fingers"))
    return geometry


def _read_load(reader: _Reader, section: str) -> LoadConfig:
    reader.check_keys(section, LOAD_SCHEMA)
    kind = reader.get(section, "type", LOAD_SCHEMA["type"], required=True)
    quantity = LOAD_DEFAULTS[kind][3]
    load = LoadConfig(label=section.split(".", 1)[1], kind=kind)
    load.magnitude = reader.get(section, "magnitude", quantity, required=kind != "magnetic")
    direction = reader.get(section, "direction", LOAD_SCHEMA["direction"])
    if direction is not None:
        norm = np.linalg.norm(direction)
        if norm == 0:
            raise ScenarioError("direction must be nonzero", "direction", reader.line(section, "direction"))
        load.direction = direction / norm
    load.frame = reader.get(section, "frame", LOAD_SCHEMA["frame"])
    return load


def _read_target(reader: _Reader, config: ScenarioConfig):
    kinds = SCHEMA["target"]
    config.target_rotation = reader.get("target", "end_rotation", kinds["end_rotation"], required=True)
    if config.target_rotation <= 0:
        raise ScenarioError("must be positive", "end_rotation", reader.line("target", "end_rotation"))
    config.target_tolerance = reader.get("target", "tolerance", kinds["tolerance"], 0.01)
    if not 0 < config.target_tolerance < 1:
        raise ScenarioError("must lie in (0, 1)", "tolerance", reader.line("target", "tolerance"))
    if any(load.kind == "magnetic" for load in config.loads):
        raise ScenarioError("end-rotation targets scale edge loads only", line=reader.line("target"))


def parse_scenario(path) -> ScenarioConfig:
    """Read and validate a scenario file.

    Raises:
        ScenarioError: Unknown sections or keys, unit mismatches, missing
            required keys or inconsistent geometry, mesh and loads.
    """
    path = Path(path)
    if not path.is_file():
        raise ScenarioError(f"scenario file {path} does not exist")
    reader = _Reader(path)
    sections = reader.parser.sections()
    for section in sections:
        if section not in SCHEMA and not section.startswith("load."):
            raise ScenarioError(f"unknown section [{section}]", line=reader.line(section))
        if section in SCHEMA:
            reader.check_keys(section, SCHEMA[section])
    for section in ("geometry", "material", "mesh"):
        if section not in sections:
            raise ScenarioError(f"missing section [{section}]")

    geometry = _read_geometry(reader)
    material = _read_material(reader)
    mesh_kinds = SCHEMA["mesh"]
    nx = reader.get("mesh", "nx", "int", required=True)
    ny = reader.get("mesh", "ny", "int", required=True)
    for key, value in (("nx", nx), ("ny", ny)):
        if value < 1:
            raise ScenarioError("element count must be at least 1", key, reader.line("mesh", key))

    config = ScenarioConfig(
        name=reader.get("scenario", "name", "str", path.stem) if "scenario" in sections else path.stem,
        description=reader.get("scenario", "description", "str", "") if "scenario" in sections else "",
        geometry=geometry,
        material=material,
        nx=nx,
        ny=ny,
        ad_mode=reader.get("mesh", "ad_mode", mesh_kinds["ad_mode"], "centroid"),
        integration=reader.get("mesh", "integration", mesh_kinds["integration"], "full"),
        source=path,
    )
    config.loads = [_read_load(reader, s) for s in sections if s.startswith("load.")]

    if "magnetic" in sections:
        kinds = SCHEMA["magnetic"]
        config.magnetic = MagneticConfig(
            remanent=reader.get("magnetic", "remanent", kinds["remanent"], required=True),
            applied=reader.get("magnetic", "applied", kinds["applied"], required=True),
            remanent_basis=reader.get("magnetic", "remanent_basis", kinds["remanent_basis"], "surface"),
            mu0=reader.get("magnetic", "mu0", kinds["mu0"], MU0),
        )
        if not config.magnetic.mu0 > 0:
            raise ScenarioError("must be positive", "mu0", reader.line("magnetic", "mu0"))
    for load in config.loads:
        if load.kind == "magnetic" and config.magnetic is None:
            raise ScenarioError(
                "magnetic load needs a [magnetic] section", "type", reader.line(f"load.{load.label}", "type")
            )
        if load.kind != "magnetic" and geometry.kind == "gripper":
            raise ScenarioError(
                "gripper scenarios take magnetic loads only", "type", reader.line(f"load.{load.label}", "type")
            )
    if not config.loads:
        raise ScenarioError("scenario defines no [load.*] section")

    if "solver" in sections:
        kinds = SCHEMA["solver"]
        values = {
            key: reader.get("solver", key, kinds[key])
            for key in kinds
            if reader.has("solver", key)
        }
        try:
            config.solver = SolverSettings(**values)
        except ValueError as exc:
            raise ScenarioError(str(exc), line=reader.line("solver")) from exc
    if "output" in sections:
        config.mesh_dumps = reader.get("output", "mesh_dumps", SCHEMA["output"]["mesh_dumps"], "final")
    if "target" in sections:
        _read_target(reader, config)
    return config


def with_overrides(config: ScenarioConfig, **overrides) -> ScenarioConfig:
    """Copy of the config with solver settings replaced where given."""
    values = {k: v for k, v in overrides.items() if v is not None}
    if not values:
        return config
    return replace(config, solver=replace(config.solver, **values))


def reference_surface(geometry: GeometryConfig) -> ReferenceSurface:
    if geometry.kind == "arch":
        return CylindricalArch(geometry.radius, geometry.angle_span, geometry.width)
    return FlatPlate(geometry.length, geometry.width)


def edge_weights(coordinates: np.ndarray) -> np.ndarray:
    """Consistent shares of a uniform line load along an edge (sum to one)."""
    s = np.asarray(coordinates, dtype=float)
    order = np.argsort(s)
    shares = np.zeros(len(s))
    segments = np.diff(s[order])
    shares[order[:-1]] += 0.5 * segments
    shares[order[1:]] += 0.5 * segments
    return shares / shares.sum()


def _apply_edge_load(mesh: ShellMesh, load: LoadConfig):
    direction, part, frame, _ = LOAD_DEFAULTS[load.kind]
    local = np.asarray(direction if load.direction is None else load.direction, dtype=float)
    frame = load.frame or frame
    tip = mesh.edge_nodes("tip")
    for node, share in zip(tip, edge_weights(mesh.node_xi[tip, 1])):
        vector = load.magnitude * share * local
        if frame == "dead":
            vector = mesh.node_R0[node] @ vector
        wrench = np.zeros(6)
        wrench[part : part + 3] = vector
        mesh.add_load(node, wrench, frame)


def _gripper_mesh(config: ScenarioConfig, remanent: np.ndarray) -> ShellMesh:
    geometry = config.geometry
    fingers = []
    for k in range(geometry.fingers):
        R = exp_so3(np.array([0.0, 0.0, 2 * np.pi * k / geometry.fingers]))
        motion = Pose(R, R @ np.array([geometry.hub, -0.5 * geometry.width, 0.0]))
        surface = RigidlyMovedSurface(FlatPlate(geometry.length, geometry.width), motion)
        finger = build_mesh(surface, config.nx, config.ny, config.material, config.ad_mode, config.integration)
        finger.clamp(finger.edge_nodes("root"))
        finger.remanent[:] = R @ remanent
        fingers.append(finger)
    return ShellMesh.merge(fingers)


def build_problem(config: ScenarioConfig):
    """Mesh with boundary data, magnetic environment and solver settings.

    Returns:
        Tuple (mesh, env, settings); env is None without a [magnetic] section.

    Raises:
        ScenarioError: If the mesh cannot be built from the geometry.
    """
    env = None
    remanent = np.zeros(3)
    if config.magnetic is not None:
        remanent = config.magnetic.remanent.copy()
        if config.magnetic.remanent_basis == "volume":
            remanent = remanent * config.material.h
        applied = config.magnetic.applied.copy()
        for load in config.loads:
            if load.kind == "magnetic" and load.magnitude is not None:
                applied = load.magnitude * applied / np.linalg.norm(applied)
        env = MagneticEnvironment(applied, config.magnetic.mu0)

    try:
        if config.geometry.kind == "gripper":
            mesh = _gripper_mesh(config, remanent)
        else:
            mesh = build_mesh(
                reference_surface(config.geometry),
                config.nx,
                config.ny,
                config.material,
                config.ad_mode,
                config.integration,
            )
            mesh.clamp(mesh.edge_nodes("root"))
            mesh.remanent[:] = remanent
            for load in config.loads:
                if load.kind != "magnetic":
                    _apply_edge_load(mesh, load)
        mesh.validate_boundary()
    except (MeshError, DomainError) as exc:
        raise ScenarioError(f"inconsistent mesh or geometry: {exc}") from exc
    return mesh, env, replace(config.solver)


def reference_load(config: ScenarioConfig, env: Optional[MagneticEnvironment]) -> float:
    """Magnitude reported in the CSV load column at load factor one."""
    for load in config.loads:
        if load.kind != "magnetic":
            return float(load.magnitude)
    return float(np.linalg.norm(env.B_applied)) if env is not None else 0.0


def bundled_scenarios() -> Dict[str, Path]:
    return {p.stem: p for p in sorted(SCENARIO_DIR.glob("*.cfg"))}
