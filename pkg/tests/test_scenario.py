import numpy as np
import pytest

from cosseratshell.bench.scenario import (
    build_problem,
    bundled_scenarios,
    edge_weights,
    parse_quantity,
    parse_scenario,
    with_overrides,
)
from cosseratshell.errors import ConfigurationError, ScenarioError
from cosseratshell.kinematics.liegroup import exp_so3
from cosseratshell.mechanics.constitutive import Material, magnetic_modulus

MAGNETIC_STRIP = """
[geometry]
type = flat
length = 10 mm
width = 2 mm

[material]
{material}

[mesh]
nx = 4
ny = 1

[magnetic]
remanent = 0.1, 0, 0 T
remanent_basis = volume
applied = 0, 0, 20 mT

[load.field]
type = magnetic
{magnitude}
"""


def strip(material="E = 1 MPa\nnu = 0.3\nh = 0.5 mm", magnitude=""):
    return MAGNETIC_STRIP.format(material=material, magnitude=magnitude)


def test_tiny_scenario(write_scenario):
    config = parse_scenario(write_scenario())
    assert config.name == "tiny"
    assert config.description.startswith("Short strip")
    assert config.material.E == 1e6 and config.material.nu == 0.0
    assert config.material.h == pytest.approx(0.01)
    assert (config.nx, config.ny) == (6, 1)
    assert config.geometry.length == 1.0 and config.geometry.width == pytest.approx(0.1)
    load = config.loads[0]
    assert (load.label, load.kind, load.magnitude, load.frame) == ("moment", "end_moment", 0.01, None)
    assert config.solver.load_steps == 3
    assert config.mesh_dumps == "final"
    assert config.magnetic is None


def test_bundled_end_shear():
    config = parse_scenario(bundled_scenarios()["end_shear"])
    assert config.material.E == pytest.approx(200e9)
    assert config.material.h == pytest.approx(0.01)
    assert config.loads[0].magnitude == pytest.approx(33333.33)
    assert config.loads[0].frame == "dead"


def test_bundled_arch_angle_in_degrees():
    config = parse_scenario(bundled_scenarios()["arch_tangent"])
    assert config.geometry.kind == "arch"
    assert config.geometry.angle_span == pytest.approx(np.pi)
    assert np.array_equal(config.loads[0].direction, [1.0, 0.0, 0.0])


@pytest.mark.parametrize(
    "text, kind, expected",
    [
        ("17.2 mm", "length", 0.0172),
        ("324.054 kPa", "pressure", 324054.0),
        ("90 deg", "angle", np.pi / 2),
        ("5 mT", "field", 0.005),
        ("1.5", "force", 1.5),
        ("628.3 N*m", "moment", 628.3),
    ],
)
def test_parse_quantity(text, kind, expected):
    assert parse_quantity(text, kind)[0] == pytest.approx(expected)


def test_parse_vector_with_unit():
    assert np.allclose(parse_quantity("9.5, 0, 0 mT", "field"), [9.5e-3, 0, 0])


def test_unit_errors_name_key_and_line():
    with pytest.raises(ScenarioError, match="unknown unit 'furlong'") as info:
        parse_quantity("3 furlong", "length", "length", 7)
    assert (info.value.key, info.value.line) == ("length", 7)
    with pytest.raises(ScenarioError, match="unit mismatch: 'T' is a field unit, expected length"):
        parse_quantity("3 T", "length")
    with pytest.raises(ScenarioError, match="not numeric"):
        parse_quantity("three m", "length")


def test_unit_mismatch_in_file(write_scenario, tiny_text):
    path = write_scenario(tiny_text.replace("h = 10 mm", "h = 10 kPa"))
    with pytest.raises(ScenarioError, match="line 13: unit mismatch") as info:
        parse_scenario(path)
    assert info.value.key == "h"


@pytest.mark.parametrize(
    "old, new, message",
    [
        ("nx = 6", "nx = 6\nspacing = 2", "unknown key"),
        ("[solver]", "[solve]", r"unknown section \[solve\]"),
        ("E = 1 MPa\n", "", "missing required key"),
        ("nx = 6", "nx = 0", "at least 1"),
        ("nu = 0", "nu = 0.5", "Poisson"),
        ("type = end_moment", "type = pressure", "not one of"),
        ("type = end_moment\nmagnitude = 0.01 N*m", "type = magnetic", r"needs a \[magnetic\] section"),
        ("type = flat", "type = gripper", "magnetic loads only"),
        ("load_steps = 3", "load_steps = 0", "at least 1"),
        ("load_steps = 3", "linear_solver = cholesky", "not one of"),
        ("nx = 6", "nx = six", "not an integer"),
    ],
)
def test_invalid_scenarios(write_scenario, tiny_text, old, new, message):
    path = write_scenario(tiny_text.replace(old, new))
    with pytest.raises(ScenarioError, match=message):
        parse_scenario(path)


def test_missing_sections_and_loads(write_scenario, tiny_text):
    no_mesh = tiny_text.replace("[mesh]\nnx = 6\nny = 1\n", "")
    with pytest.raises(ScenarioError, match=r"missing section \[mesh\]"):
        parse_scenario(write_scenario(no_mesh))
    no_load = tiny_text.replace("[load.moment]\ntype = end_moment\nmagnitude = 0.01 N*m\n", "")
    with pytest.raises(ScenarioError, match="no \\[load"):
        parse_scenario(write_scenario(no_load))
    with pytest.raises(ScenarioError, match="does not exist"):
        parse_scenario("nowhere.cfg")


def test_missing_key_reports_section_line(write_scenario, tiny_text):
    path = write_scenario(tiny_text.replace("E = 1 MPa\n", ""))
    with pytest.raises(ScenarioError) as info:
        parse_scenario(path)
    assert info.value.key == "E"
    assert info.value.line == 10


def test_scenario_errors_are_configuration_errors(write_scenario, tiny_text):
    with pytest.raises(ConfigurationError):
        parse_scenario(write_scenario(tiny_text.replace("nx = 6", "nx = -1")))


@pytest.mark.parametrize(
    "material, E",
    [
        ("E = 1 MPa\nnu = 0.3\nh = 0.5 mm", 1e6),
        ("E0 = 100 kPa\nmodulus_factor = 1.5\nnu = 0.3\nh = 0.5 mm", 1.5e5),
        ("E0 = 100 kPa\nvolume_fraction = 0.06\nnu = 0.3\nh = 0.5 mm", magnetic_modulus(1e5, 0.06)),
    ],
)
def test_material_paths(write_scenario, material, E):
    config = parse_scenario(write_scenario(strip(material)))
    assert config.material.E == pytest.approx(E)


def test_lame_material(write_scenario):
    config = parse_scenario(write_scenario(strip("mu = 303 kPa\nlambda = 7300 kPa\nh = 0.5 mm")))
    assert config.material == Material.from_lame(303e3, 7300e3, 5e-4)


def test_magnetic_section_and_volume_basis(write_scenario):
    config = parse_scenario(write_scenario(strip()))
    assert config.magnetic.remanent_basis == "volume"
    assert np.allclose(config.magnetic.applied, [0, 0, 0.02])
    mesh, env, _ = build_problem(config)
    assert np.allclose(mesh.remanent, [0.1 * 5e-4, 0.0, 0.0])
    assert np.allclose(env.B_applied, [0, 0, 0.02])
    assert mesh.loads == []
    assert mesh.dirichlet[mesh.edge_nodes("root")].all()


def test_magnetic_magnitude_rescales_field(write_scenario):
    config = parse_scenario(write_scenario(strip(magnitude="magnitude = 50 mT")))
    _, env, _ = build_problem(config)
    assert np.allclose(env.B_applied, [0, 0, 0.05])


def test_edge_weights():
    assert np.allclose(edge_weights([0.0, 0.5, 1.0]), [0.25, 0.5, 0.25])
    assert np.allclose(edge_weights([0.0, 1.0]), [0.5, 0.5])
    assert np.allclose(edge_weights([1.0, 0.0, 0.5]), [0.25, 0.25, 0.5])


def test_end_loads_are_shared_over_tip_nodes(write_scenario, tiny_text):
    config = parse_scenario(write_scenario(tiny_text.replace("ny = 1", "ny = 2")))
    mesh, env, settings = build_problem(config)
    assert env is None and settings.load_steps == 3
    tip = mesh.edge_nodes("tip")
    assert [load.node for load in mesh.loads] == tip.tolist()
    moments = np.array([load.wrench[4] for load in mesh.loads])
    assert np.allclose(moments, [0.0025, 0.005, 0.0025])
    assert all(load.frame == "follower" for load in mesh.loads)


def test_dead_loads_are_spatial_on_curved_edges():
    config = parse_scenario(bundled_scenarios()["arch_transverse"])
    config.loads[0].frame = "dead"
    mesh, _, _ = build_problem(config)
    load = mesh.loads[0]
    tip_R = mesh.node_R0[load.node]
    assert np.allclose(load.wrench[:3], tip_R @ (config.loads[0].direction * 1440.0))


def test_gripper_fingers():
    config = parse_scenario(bundled_scenarios()["gripper"])
    mesh, env, _ = build_problem(config)
    per_finger = (config.nx + 1) * (config.ny + 1)
    assert mesh.n_nodes == 4 * per_finger
    assert len(mesh.grids) == 4
    assert mesh.dirichlet.sum() == 4 * 6 * (config.ny + 1)
    h = config.material.h
    for k in range(4):
        R = exp_so3(np.array([0.0, 0.0, 0.5 * np.pi * k]))
        elements = slice(k * config.nx, (k + 1) * config.nx)
        assert np.allclose(mesh.remanent[elements], R @ [0.143 * h, 0, 0], atol=1e-15)
        root = mesh.node_P0[mesh.edge_nodes("root", patch=k)]
        assert np.allclose(np.linalg.norm(root[:, :2].mean(axis=0)), 5e-3)


def test_overrides_replace_solver_settings(write_scenario):
    config = parse_scenario(write_scenario())
    changed = with_overrides(config, load_steps=7, tol_residual=None)
    assert changed.solver.load_steps == 7
    assert changed.solver.tol_residual == config.solver.tol_residual
    assert config.solver.load_steps == 3
    assert with_overrides(config) is config


@pytest.mark.parametrize("name", sorted(bundled_scenarios()))
def test_bundled_scenarios_build(name):
    config = parse_scenario(bundled_scenarios()[name])
    assert config.name == name
    mesh, env, settings = build_problem(config)
    assert mesh.n_elements >= config.nx * config.ny
    assert len(mesh.free_dofs()) < mesh.n_dofs
    assert (env is not None) == (config.magnetic is not None)


def test_bundled_scenario_count():
    assert len(bundled_scenarios()) == 21


def test_target_section(write_scenario, tiny_text):
    config = parse_scenario(write_scenario(tiny_text + "\n[target]\nend_rotation = 90 deg\n"))
    assert config.target_rotation == pytest.approx(0.5 * np.pi)
    assert config.target_tolerance == 0.01
    assert parse_scenario(write_scenario()).target_rotation is None
    assert parse_scenario(bundled_scenarios()["torsion_2pi"]).target_rotation == pytest.approx(2 * np.pi)


@pytest.mark.parametrize(
    "target, message",
    [
        ("end_rotation = -10 deg", "must be positive"),
        ("end_rotation = 1 rad\ntolerance = 2", r"must lie in \(0, 1\)"),
        ("tolerance = 0.1", "missing required key"),
        ("end_rotation = 1 m", "unit mismatch"),
    ],
)
def test_invalid_targets(write_scenario, tiny_text, target, message):
    with pytest.raises(ScenarioError, match=message):
        parse_scenario(write_scenario(tiny_text + f"\n[target]\n{target}\n"))


def test_target_rejects_magnetic_loads(write_scenario):
    with pytest.raises(ScenarioError, match="edge loads only"):
        parse_scenario(write_scenario(strip() + "\n[target]\nend_rotation = 1 rad\n"))
