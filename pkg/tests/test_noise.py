import numpy as np
import pytest
from scipy.sparse.linalg import splu

import elastic_uc as uc
from elastic_uc.assemble import assemble_grad_stiffness, assemble_mass


@pytest.fixture(scope="module")
def noise_setup(convex_mesh_l1):
    space = uc.FunctionSpace(convex_mesh_l1, 2)
    m_omega = assemble_mass(space, region="omega")
    m_full = assemble_mass(space)
    return space, m_omega, m_full


def test_same_seed_reproduces_bitwise(noise_setup):
    space, m_omega, m_full = noise_setup
    spec = uc.NoiseSpec(theta=1, amplitude=1.0, seed=42)
    p1 = uc.make_perturbation(space, spec, m_omega, m_full)
    p2 = uc.make_perturbation(space, spec, m_omega, m_full)
    assert np.array_equal(p1.du, p2.du)
    assert np.array_equal(p1.df, p2.df)
    p3 = uc.make_perturbation(space, uc.NoiseSpec(1, 1.0, 43), m_omega, m_full)
    assert not np.array_equal(p1.du, p3.du)


@pytest.mark.parametrize("theta", [0, 1, 2])
def test_norms_hit_target_exactly(noise_setup, theta):
    space, m_omega, m_full = noise_setup
    spec = uc.NoiseSpec(theta=theta, amplitude=0.7, seed=3)
    pert = uc.make_perturbation(space, spec, m_omega, m_full)
    target = 0.7 * space.h ** (space.p - theta)
    nrm_u = np.sqrt(pert.du @ (m_omega @ pert.du))
    nrm_f = np.sqrt(pert.df @ (m_full @ pert.df))
    assert abs(nrm_u - target) <= 1e-12 * target
    assert abs(nrm_f - target) <= 1e-12 * target


def test_theta_equal_p_gives_constant_norm(convex_geometry):
    # no decay under refinement when theta = p
    norms = []
    for lev in (0, 1):
        mesh = uc.mesh_at_level(convex_geometry, lev)
        space = uc.FunctionSpace(mesh, 2)
        m_omega = assemble_mass(space, region="omega")
        m_full = assemble_mass(space)
        pert = uc.make_perturbation(space, uc.NoiseSpec(2, 1.0, 5), m_omega, m_full)
        norms.append(np.sqrt(pert.du @ (m_omega @ pert.du)))
    assert abs(norms[0] - 1.0) < 1e-12 and abs(norms[1] - 1.0) < 1e-12


def test_zero_amplitude_gives_zero_perturbation(noise_setup):
    space, m_omega, m_full = noise_setup
    pert = uc.make_perturbation(space, uc.NoiseSpec(0, 0.0, 5), m_omega, m_full)
    assert np.abs(pert.du).max() == 0.0 and np.abs(pert.df).max() == 0.0


def test_zero_amplitude_system_reduces_to_unperturbed(convex_mesh_l1):
    space = uc.FunctionSpace(convex_mesh_l1, 1)
    material = uc.MaterialModel.trigonometric(k=1)
    reference = uc.ReferenceSolution.oscillatory(1)
    params = uc.StabilizationParams.defaults(1)
    m_omega = assemble_mass(space, region="omega")
    m_full = assemble_mass(space)
    pert = uc.make_perturbation(space, uc.NoiseSpec(0, 0.0, 5), m_omega, m_full)
    plain = uc.build_saddle_system(space, material, params, reference)
    noisy = uc.build_saddle_system(
        space, material, params, reference, data="perturbed", perturbation=pert
    )
    assert np.abs(plain.rhs - noisy.rhs).max() == 0.0


def test_empty_data_region_raises(two_cell_mesh):
    space = uc.FunctionSpace(two_cell_mesh, 1)
    with pytest.raises(ValueError):
        uc.make_perturbation(space, uc.NoiseSpec(0, 1.0, 0), None, None)


def test_spec_validation():
    with pytest.raises(ValueError):
        uc.NoiseSpec(theta=-1)
    with pytest.raises(ValueError):
        uc.NoiseSpec(theta=0, amplitude=-2.0)


def test_dual_norm_bounded_by_l2(noise_setup):
    # ||df||_{H^-1} <= C ||df||_{L2} via the discrete dual solve
    space, m_omega, m_full = noise_setup
    pert = uc.make_perturbation(space, uc.NoiseSpec(0, 1.0, 11), m_omega, m_full)
    s_star = assemble_grad_stiffness(space)
    idofs = space.dofmap.interior_vector_dofs
    rhs = (m_full @ pert.df)[idofs]
    w = splu(s_star[idofs][:, idofs].tocsc()).solve(rhs)
    dual_norm = np.sqrt(abs(rhs @ w))
    l2_norm = np.sqrt(pert.df @ (m_full @ pert.df))
    assert dual_norm <= 1.0 * l2_norm
