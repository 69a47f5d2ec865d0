"""Entrywise comparison of every assembled block against an independent
dense brute-force implementation (2-cell mesh, P1, constant coefficients).

The oracle shares nothing with the package's assembly path: physical-space
hat functions from 3x3 solves, a hardcoded 7-point quadrature rule, and
direct evaluation of the integrands.
"""

import numpy as np
import pytest

import elastic_uc as uc
from elastic_uc import assemble as asm

MU, LAM, K = 1.3, 0.7, 2.0
RHO = -K**2  # default sign convention

# classic 7-point degree-5 rule; barycentric points, weights sum to 1
_SQ15 = np.sqrt(15.0)
_A = (6.0 + _SQ15) / 21.0
_B = (6.0 - _SQ15) / 21.0
_BARY = np.array(
    [
        [1 / 3, 1 / 3, 1 / 3],
        [1 - 2 * _A, _A, _A],
        [_A, 1 - 2 * _A, _A],
        [_A, _A, 1 - 2 * _A],
        [1 - 2 * _B, _B, _B],
        [_B, 1 - 2 * _B, _B],
        [_B, _B, 1 - 2 * _B],
    ]
)
_WTS = np.array(
    [9 / 40] + [(155 + _SQ15) / 1200] * 3 + [(155 - _SQ15) / 1200] * 3
)


def hat_functions(tri):
    """Coefficients (a, b, c) of each P1 hat a + b x + c y on one triangle."""
    mat = np.column_stack([np.ones(3), tri[:, 0], tri[:, 1]])
    return np.linalg.solve(mat, np.eye(3))  # column i: hat of vertex i


def quad_points(tri):
    return _BARY @ tri


def tri_area(tri):
    e1, e2 = tri[1] - tri[0], tri[2] - tri[0]
    return 0.5 * abs(e1[0] * e2[1] - e1[1] * e2[0])


def oracle_blocks(mesh):
    """Dense (2n x 2n) matrices for every bilinear form of the method."""
    n = 2 * mesh.n_vertices
    blocks = {
        name: np.zeros((n, n))
        for name in ("mass", "lame", "grad", "divdiv", "gls", "jump1")
    }

    for tri_ids in mesh.cells:
        tri = mesh.vertices[tri_ids]
        coeffs = hat_functions(tri)
        area = tri_area(tri)
        pts = quad_points(tri)
        for li, vi in enumerate(tri_ids):
            phi_i = coeffs[0, li] + coeffs[1, li] * pts[:, 0] + coeffs[2, li] * pts[:, 1]
            grad_i = coeffs[1:, li]
            for lj, vj in enumerate(tri_ids):
                phi_j = coeffs[0, lj] + coeffs[1, lj] * pts[:, 0] + coeffs[2, lj] * pts[:, 1]
                grad_j = coeffs[1:, lj]
                for ci in range(2):
                    for cj in range(2):
                        gi = np.zeros((2, 2))
                        gi[ci] = grad_i  # row i of grad(phi e_ci): d_m u_i
                        gj = np.zeros((2, 2))
                        gj[cj] = grad_j
                        eps_i = 0.5 * (gi + gi.T)
                        eps_j = 0.5 * (gj + gj.T)
                        sig_j = 2 * MU * eps_j + LAM * np.trace(eps_j) * np.eye(2)
                        same = 1.0 if ci == cj else 0.0

                        mass_val = same * area * (_WTS @ (phi_i * phi_j))
                        lame_val = area * np.sum(sig_j * eps_i) - RHO * mass_val
                        grad_val = same * area * grad_i @ grad_j
                        div_val = area * np.trace(gi) * np.trace(gj)
                        # L(phi e_c) = -rho phi e_c for P1 with constant coefficients
                        gls_val = mesh.h**2 * RHO**2 * mass_val

                        r, c = 2 * vi + ci, 2 * vj + cj
                        blocks["mass"][r, c] += mass_val
                        blocks["lame"][r, c] += lame_val
                        blocks["grad"][r, c] += grad_val
                        blocks["divdiv"][r, c] += div_val
                        blocks["gls"][r, c] += gls_val

    # single interior facet: traction jump is constant along it for P1
    (fa, fb), (c1, c2) = mesh.interior_facets[0], mesh.interior_facet_cells[0]
    va, vb = mesh.vertices[fa], mesh.vertices[fb]
    length = np.linalg.norm(vb - va)
    normal = mesh.interior_facet_normals[0]

    def tractions(cell, nrm):
        tri_ids = mesh.cells[cell]
        coeffs = hat_functions(mesh.vertices[tri_ids])
        out = {}
        for li, vi in enumerate(tri_ids):
            for ci in range(2):
                g = np.zeros((2, 2))
                g[ci] = coeffs[1:, li]
                eps = 0.5 * (g + g.T)
                sig = 2 * MU * eps + LAM * np.trace(eps) * np.eye(2)
                out[2 * vi + ci] = sig @ nrm
        return out

    t1 = tractions(c1, normal)
    t2 = tractions(c2, -normal)
    jump = {}
    for dof in set(t1) | set(t2):
        jump[dof] = t1.get(dof, np.zeros(2)) + t2.get(dof, np.zeros(2))
    for r, tr in jump.items():
        for c, tc in jump.items():
            blocks["jump1"][r, c] += mesh.h * length * (tr @ tc)
    return blocks


@pytest.fixture(scope="module")
def setup(two_cell_mesh):
    tagged = uc.tag_regions(
        two_cell_mesh, {"omega": uc.RegionSpec((uc.Rectangle(0, 0, 1, 1),))}
    )
    space = uc.FunctionSpace(tagged, 1)
    material = uc.MaterialModel.constant(MU, LAM, K)
    return space, material, oracle_blocks(tagged)


def _dense(mat):
    return np.asarray(mat.todense())


def test_mass_matches_oracle(setup):
    space, material, oracle = setup
    assert np.abs(_dense(asm.assemble_mass(space)) - oracle["mass"]).max() <= 1e-12


def test_omega_mass_matches_oracle(setup):
    space, material, oracle = setup
    m = asm.assemble_mass(space, region="omega")
    assert np.abs(_dense(m) - oracle["mass"]).max() <= 1e-12


def test_lame_form_matches_oracle(setup):
    space, material, oracle = setup
    a = asm.assemble_lame_form(space, material)
    assert np.abs(_dense(a) - oracle["lame"]).max() <= 1e-12


def test_grad_stiffness_matches_oracle(setup):
    space, material, oracle = setup
    s = asm.assemble_grad_stiffness(space)
    assert np.abs(_dense(s) - oracle["grad"]).max() <= 1e-12


def test_div_div_matches_oracle(setup):
    space, material, oracle = setup
    d = asm.assemble_div_div(space)
    assert np.abs(_dense(d) - oracle["divdiv"]).max() <= 1e-12


def test_residual_penalty_matches_oracle(setup):
    space, material, oracle = setup
    g = asm.assemble_residual_penalty(space, material)
    assert np.abs(_dense(g) - oracle["gls"]).max() <= 1e-12


def test_stress_jump_matches_oracle(setup):
    space, material, oracle = setup
    j1 = asm.assemble_stress_jump(space, material, 1)
    assert np.abs(_dense(j1) - oracle["jump1"]).max() <= 1e-12


def test_tikhonov_matches_oracle(setup):
    space, material, oracle = setup
    alpha = 1e-3
    t = asm.assemble_tikhonov(space, alpha)
    assert np.abs(_dense(t) - alpha * space.h**2 * oracle["mass"]).max() <= 1e-14


def test_omega_mass_subregion_against_oracle():
    # 8-cell mesh, omega = left half: restrict the oracle loop to tagged cells
    mesh = uc.build_fitted_mesh([0, 0.5, 1], [0, 0.5, 1])
    tagged = uc.tag_regions(
        mesh, {"omega": uc.RegionSpec((uc.Rectangle(0.0, 0.0, 0.5, 1.0),))}
    )
    space = uc.FunctionSpace(tagged, 1)
    m = np.asarray(asm.assemble_mass(space, region="omega").todense())

    n = 2 * tagged.n_vertices
    expected = np.zeros((n, n))
    inside = tagged.cell_regions["omega"]
    for cell, tri_ids in enumerate(tagged.cells):
        if not inside[cell]:
            continue
        tri = tagged.vertices[tri_ids]
        coeffs = hat_functions(tri)
        area = tri_area(tri)
        pts = quad_points(tri)
        for li, vi in enumerate(tri_ids):
            phi_i = coeffs[0, li] + coeffs[1, li] * pts[:, 0] + coeffs[2, li] * pts[:, 1]
            for lj, vj in enumerate(tri_ids):
                phi_j = coeffs[0, lj] + coeffs[1, lj] * pts[:, 0] + coeffs[2, lj] * pts[:, 1]
                val = area * (_WTS @ (phi_i * phi_j))
                for c in range(2):
                    expected[2 * vi + c, 2 * vj + c] += val
    assert np.abs(m - expected).max() <= 1e-12
