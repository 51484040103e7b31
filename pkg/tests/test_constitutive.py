import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cosseratshell.errors import DomainError
from cosseratshell.mechanics.constitutive import (
    Material,
    h_tensor,
    internal_energy_density,
    magnetic_modulus,
    stacked_operator,
    stiffness_blocks,
    stress,
)

entries = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)
strains = st.lists(entries, min_size=12, max_size=12).map(lambda v: np.reshape(v, (6, 2)))


def random_metric_inverse(rng):
    C = np.eye(2) + 0.3 * rng.normal(size=(2, 2))
    return np.linalg.inv(C.T @ C)


def test_h_tensor_on_identity_metric():
    H = h_tensor(np.eye(2), 0.3)
    assert H[0, 0, 0, 0] == pytest.approx(1.0)
    assert H[0, 0, 1, 1] == pytest.approx(0.3)
    assert H[0, 1, 0, 1] == pytest.approx(0.7)
    assert H[0, 1, 1, 0] == pytest.approx(0.0)


def test_membrane_block_without_poisson_coupling():
    mat = Material(E=2.0, nu=0.0, h=0.5)
    D = stiffness_blocks(mat, np.eye(2))
    assert np.allclose(D[0, 0, :3, :3], mat.E * mat.h * np.diag([1.0, 1.0, 0.5]))
    assert np.allclose(D[0, 1, :3, :3], 0.0)


def test_poisson_coupling_sits_in_cross_blocks():
    mat = Material(E=1.0, nu=0.3, h=0.1)
    D = stiffness_blocks(mat, np.eye(2))
    c = mat.membrane_modulus
    assert D[0, 1, 0, 1] == pytest.approx(c * 0.3)
    assert D[0, 0, 0, 1] == pytest.approx(0.0)
    assert D[0, 0, 1, 1] == pytest.approx(c * 0.7)
    assert D[0, 0, 2, 2] == pytest.approx(c * 0.35)


def test_bending_drilling_entry():
    mat = Material(E=3.0, nu=0.25, h=0.2)
    D = stiffness_blocks(mat, np.eye(2))
    expected = mat.E * mat.h**3 / (12 * (1 - mat.nu**2)) * (1 - mat.nu)
    assert D[0, 0, 5, 5] == pytest.approx(expected)


def test_blocks_are_block_diagonal(rng):
    D = stiffness_blocks(Material(1.0, 0.3, 0.1), random_metric_inverse(rng))
    assert np.allclose(D[..., :3, 3:], 0.0)
    assert np.allclose(D[..., 3:, :3], 0.0)


def test_stacked_operator_is_symmetric_psd(rng):
    mat = Material(E=5.0, nu=0.3, h=0.1)
    for _ in range(10):
        op = stacked_operator(stiffness_blocks(mat, random_metric_inverse(rng)))
        assert np.allclose(op, op.T, atol=1e-14)
        assert np.linalg.eigvalsh(op).min() >= -1e-10 * np.linalg.norm(op)


def test_zero_strain_gives_zero_stress():
    D = stiffness_blocks(Material(1.0, 0.3, 0.1), np.eye(2))
    assert np.array_equal(stress(D, np.zeros((6, 2))), np.zeros((6, 2)))


def test_pure_bending_moment():
    mat = Material(E=10.0, nu=0.0, h=0.3)
    kappa = 0.2
    E = np.zeros((6, 2))
    E[4, 0] = kappa
    S = stress(stiffness_blocks(mat, np.eye(2)), E)
    moment = mat.E * mat.h**3 * kappa / 12
    assert S[4, 0] == pytest.approx(moment)
    assert internal_energy_density(S, E) == pytest.approx(-0.5 * kappa * moment)


def test_twisting_moment_with_poisson():
    mat = Material(E=10.0, nu=0.3, h=0.3)
    E = np.zeros((6, 2))
    E[3, 0] = 0.1
    S = stress(stiffness_blocks(mat, np.eye(2)), E)
    assert S[3, 0] == pytest.approx(mat.E * mat.h**3 * 0.1 / (12 * (1 - mat.nu**2)))


def test_stretch_stress_matches_matrix_product():
    mat = Material(E=1.0, nu=0.3, h=0.1)
    D = stiffness_blocks(mat, np.eye(2))
    E = np.zeros((6, 2))
    E[0, 0] = 0.01
    S = stress(D, E)
    assert np.allclose(S[:, 0], D[0, 0] @ E[:, 0])
    assert np.allclose(S[:, 1], D[1, 0] @ E[:, 0])


@settings(max_examples=50, deadline=None)
@given(strains, strains)
def test_stress_is_self_adjoint(E1, E2):
    D = stiffness_blocks(Material(2.0, 0.3, 0.1), np.array([[1.2, 0.1], [0.1, 0.9]]))
    left = np.sum(stress(D, E1) * E2)
    right = np.sum(stress(D, E2) * E1)
    assert left == pytest.approx(right, rel=1e-12, abs=1e-15)


def test_stress_is_linear(rng):
    D = stiffness_blocks(Material(2.0, 0.3, 0.1), random_metric_inverse(rng))
    E1, E2 = rng.normal(size=(6, 2)), rng.normal(size=(6, 2))
    a, b = 0.7, -1.3
    assert np.allclose(stress(D, a * E1 + b * E2), a * stress(D, E1) + b * stress(D, E2))


def test_energy_is_quadratic(rng):
    D = stiffness_blocks(Material(2.0, 0.3, 0.1), np.eye(2))
    E = rng.normal(size=(6, 2))
    energy = internal_energy_density(stress(D, E), E)
    assert energy <= 0.0
    assert internal_energy_density(stress(D, 2 * E), 2 * E) == pytest.approx(4 * energy)
    assert energy == pytest.approx(-0.5 * np.sum(stress(D, E) * E))


def test_batched_blocks_match_single(rng):
    Ainv = np.stack([random_metric_inverse(rng) for _ in range(3)])
    mat = Material(1.0, 0.2, 0.1)
    batch = stiffness_blocks(mat, Ainv)
    assert np.allclose(batch[1], stiffness_blocks(mat, Ainv[1]))


def test_material_validation():
    with pytest.raises(DomainError, match="Poisson"):
        Material(E=1.0, nu=0.5, h=0.1)
    with pytest.raises(DomainError, match="thickness"):
        Material(E=1.0, nu=0.3, h=0.0)
    with pytest.raises(DomainError, match="Young"):
        Material(E=-1.0, nu=0.3, h=0.1)


def test_lame_conversion():
    mu, lam = 303e3, 7300e3
    mat = Material.from_lame(mu, lam, h=1e-3)
    assert mat.E == pytest.approx(mu * (3 * lam + 2 * mu) / (lam + mu))
    assert mat.nu == pytest.approx(lam / (2 * (lam + mu)))
    assert mat.E / (2 * (1 + mat.nu)) == pytest.approx(mu)


def test_magnetic_modulus_factors():
    assert magnetic_modulus(10.0, 0.0) == 10.0
    assert magnetic_modulus(1.0, 0.06) == pytest.approx(1.177, abs=1e-3)
    assert magnetic_modulus(1.0, 0.12) == pytest.approx(1.430, abs=1e-3)
    with pytest.raises(DomainError, match="volume fraction"):
        magnetic_modulus(1.0, 0.8)
