import textwrap

import numpy as np
import pytest

from cosseratshell.fem.mesh import build_mesh
from cosseratshell.kinematics.surface import CylindricalArch, FlatPlate
from cosseratshell.mechanics.constitutive import Material
from cosseratshell.solver.newton import update_configuration, update_twists

TINY_SCENARIO = """
[scenario]
name = tiny
description = Short strip bent by a follower end moment

[geometry]
type = flat
length = 1 m
width = 0.1 m

[material]
E = 1 MPa
nu = 0
h = 10 mm

[mesh]
nx = 6
ny = 1

[load.moment]
type = end_moment
magnitude = 0.01 N*m

[solver]
load_steps = 3
"""


@pytest.fixture
def rng():
    """Seeded generator so that failures can be replayed"""
    return np.random.default_rng(20240513)


@pytest.fixture
def unit_material():
    """O(1) material so finite differences stay well scaled"""
    return Material(E=1.0, nu=0.3, h=0.1)


@pytest.fixture
def plate_mesh(unit_material):
    """Factory for small flat-plate meshes"""

    def make(nx=4, ny=2, length=2.0, width=1.0, material=None, **kwargs):
        return build_mesh(
            FlatPlate(length, width), nx, ny, material or unit_material, **kwargs
        )

    return make


@pytest.fixture
def arch_mesh(unit_material):
    """Factory for half-cylinder meshes"""

    def make(nx=4, ny=2, radius=1.0, width=0.5, material=None, **kwargs):
        return build_mesh(
            CylindricalArch(radius, np.pi, width), nx, ny, material or unit_material, **kwargs
        )

    return make


@pytest.fixture
def perturb(rng):
    """Move a mesh to a random nearby state through the solver update rule"""

    def apply(mesh, amplitude=0.1):
        eta = amplitude * rng.standard_normal((mesh.n_nodes, 6))
        update_configuration(mesh, eta)
        update_twists(mesh, eta)
        return mesh

    return apply


@pytest.fixture
def write_scenario(tmp_path):
    """Write scenario text to a file in the test directory"""

    def write(text=TINY_SCENARIO, name="tiny.cfg"):
        path = tmp_path / name
        path.write_text(textwrap.dedent(text).lstrip())
        return path

    return write


@pytest.fixture
def tiny_text():
    """Text of the smallest valid scenario"""
    return TINY_SCENARIO
