"""Saddle-point optimality system: build, solve, and conditioning.

The system couples a primal field over the full vector space with a dual
field over the subspace with homogeneous boundary values.  Its block
structure is

    [ M_omega + S_gamma + S_alpha      (A + S_beta)^T ] [u]   [b_u]
    [ A + S_beta                       -S_star        ] [z] = [b_z]

with the dual rows/columns restricted to interior dofs.  The well-posed
variant additionally constrains the primal boundary dofs to interpolated
Dirichlet data and eliminates them symmetrically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assemble import (
    assemble_div_div,
    assemble_div_load,
    assemble_grad_stiffness,
    assemble_lame_form,
    assemble_load,
    assemble_mass,
    assemble_residual_penalty,
    assemble_residual_penalty_cross,
    assemble_residual_penalty_rhs,
    assemble_stress_jump,
)

SOLVE_TOL = 1e-8
_REFINE_STEPS = 2


@dataclass(frozen=True)
class StabilizationParams:
    """Penalty weights; gammas/betas are indexed by jump order 1..p."""

    gammas: tuple[float, ...]
    gamma_gls: float
    alpha: float
    betas: tuple[float, ...]

    @classmethod
    def defaults(cls, p, gamma1=None, gamma_gls=None, alpha=1e-3, beta2=0.0, gamma2=None):
        """Tuned defaults: gamma1 = gamma_GLS = 1e-5 / p^3.5, alpha = 1e-3."""
        g1 = 1e-5 / p**3.5 if gamma1 is None else gamma1
        ggls = g1 if gamma_gls is None else gamma_gls
        gammas = [g1] + [0.0] * (p - 1)
        betas = [0.0] * p
        if p >= 2:
            betas[1] = beta2
            gammas[1] = abs(beta2) if gamma2 is None else gamma2
        return cls(tuple(gammas), ggls, alpha, tuple(betas))

    def validate(self, p, material_smooth):
        if len(self.gammas) != p or len(self.betas) != p:
            raise ValueError("need one gamma and one beta per jump order 1..p")
        if self.gammas[0] <= 0 or self.gamma_gls <= 0 or self.alpha <= 0:
            raise ValueError("gamma_1, gamma_GLS and alpha must be positive")
        for j in range(2, p + 1):
            if self.gammas[j - 1] < max(0.0, abs(self.betas[j - 1])):
                raise ValueError(f"gamma_{j} must dominate |beta_{j}|")
        if not material_smooth:
            for j in range(2, p + 1):
                if self.gammas[j - 1] != 0.0 or self.betas[j - 1] != 0.0:
                    raise ValueError(
                        "jump penalties of order >= 2 require smooth coefficients"
                    )


@dataclass(frozen=True, eq=False)
class ConditionEstimate:
    kappa: float
    converged: bool
    iterations: int


class SaddleSystem:
    def __init__(self, space, blocks, matrix, rhs, primal_free, dual_dofs,
                 constrained, constrained_values):
        self.space = space
        self.blocks = blocks
        self.matrix = matrix.tocsc()
        self.rhs = rhs
        self.primal_free = primal_free
        self.dual_dofs = dual_dofs
        self.constrained = constrained
        self.constrained_values = constrained_values
        self._lu = None
        self.last_residual = None

    @property
    def n_unknowns(self):
        return self.matrix.shape[0]

    def _factor(self):
        if self._lu is None:
            try:
                self._lu = spla.splu(self.matrix)
            except RuntimeError as exc:  # singular factorization / pivot breakdown
                raise RuntimeError(f"sparse factorization failed: {exc}") from exc
        return self._lu

    def solve(self):
        """Solve for (u_h, z_h); returns full-length coefficient vectors."""
        lu = self._factor()
        b = self.rhs
        x = lu.solve(b)
        bnorm = np.abs(b).max()
        for _ in range(_REFINE_STEPS):
            r = b - self.matrix @ x
            rel = np.abs(r).max() / bnorm if bnorm > 0 else 0.0
            if rel <= SOLVE_TOL:
                break
            x = x + lu.solve(r)
        r = b - self.matrix @ x
        rel = np.abs(r).max() / bnorm if bnorm > 0 else 0.0
        if rel > SOLVE_TOL:
            raise RuntimeError(f"solver residual {rel:.3e} above {SOLVE_TOL:.0e}")
        self.last_residual = rel

        nf = len(self.primal_free)
        u = np.zeros(self.space.n_dofs)
        u[self.primal_free] = x[:nf]
        if len(self.constrained):
            u[self.constrained] = self.constrained_values
        z = np.zeros(self.space.n_dofs)
        z[self.dual_dofs] = x[nf:]
        return u, z

    def condition_estimate(self, seed=0, tol=5e-3, maxit=300):
        return estimate_spectral_condition(
            self.matrix, self._factor(), seed=seed, tol=tol, maxit=maxit
        )

    def export_matrix(self, path):
        """MatrixMarket coordinate dump of the reduced system matrix."""
        from scipy.io import mmwrite

        mmwrite(path, self.matrix.tocoo())


def inf_sup_identity(system, u, z):
    """Both sides of A[(u,z),(u,-z)] = |u|_omega^2 + |u|_Vh^2 + |z|_Wh^2.

    With divergence augmentation the (1,1) block carries the extra div-div
    term, which then also appears on the right-hand side.
    """
    blocks = system.blocks
    cross = blocks["lame"] + blocks["s_beta"] if blocks["s_beta"] is not None else blocks["lame"]
    k11 = blocks["omega_mass"] + blocks["s_gamma"] + blocks["s_alpha"]
    if blocks.get("div_div") is not None:
        k11 = k11 + blocks["div_div"]
    lhs = u @ (k11 @ u) + u @ (cross @ z) - z @ (cross @ u) + z @ (blocks["s_star"] @ z)
    rhs = (
        u @ (blocks["omega_mass"] @ u)
        + u @ (blocks["s_gamma"] @ u)
        + u @ (blocks["s_alpha"] @ u)
        + z @ (blocks["s_star"] @ z)
    )
    if blocks.get("div_div") is not None:
        rhs += u @ (blocks["div_div"] @ u)
    return lhs, rhs


def estimate_spectral_condition(matrix, lu=None, seed=0, tol=5e-3, maxit=300):
    """kappa = sigma_max / sigma_min via power iteration on K^T K and its inverse."""
    matrix = matrix.tocsc()
    if lu is None:
        lu = spla.splu(matrix)
    mt = matrix.T.tocsc()
    rng = np.random.default_rng(seed)
    n = matrix.shape[0]

    def power(apply_op):
        x = rng.standard_normal(n)
        x /= np.linalg.norm(x)
        est_prev, it = None, 0
        for it in range(1, maxit + 1):
            y = apply_op(x)
            est = float(np.sqrt(x @ y))  # Rayleigh quotient of the SPD operator
            ny = np.linalg.norm(y)
            if ny == 0:
                return 0.0, True, it
            x = y / ny
            if est_prev is not None and abs(est - est_prev) <= tol * est:
                return est, True, it
            est_prev = est
        return est_prev, False, maxit

    smax, ok1, it1 = power(lambda x: mt @ (matrix @ x))
    sinv, ok2, it2 = power(lambda x: lu.solve(lu.solve(x, trans="T"), trans="N"))
    kappa = float(smax * sinv)  # sqrt(lam_max(K^T K)) * sqrt(lam_max((K^T K)^-1))
    return ConditionEstimate(kappa, ok1 and ok2, it1 + it2)


def build_saddle_system(
    space,
    material,
    params,
    reference,
    problem_kind="ill-posed",
    data="unperturbed",
    perturbation=None,
    divergence_data=False,
):
    """Assemble the optimality system for one mesh level.

    `reference` supplies the measurement trace on omega and the manufactured
    source; `perturbation` (from the noise module) holds FE coefficient
    vectors (du, df) added to the data.
    """
    if problem_kind not in ("ill-posed", "well-posed-dirichlet"):
        raise ValueError(f"unknown problem kind {problem_kind!r}")
    if data not in ("unperturbed", "perturbed"):
        raise ValueError(f"unknown data mode {data!r}")
    if data == "perturbed" and perturbation is None:
        raise ValueError("perturbed data requested without a noise perturbation")
    if data == "unperturbed" and perturbation is not None:
        raise ValueError("perturbation supplied but data mode is 'unperturbed'")
    params.validate(space.p, material.is_smooth)
    p = space.p

    mat_sides = material.cell_sides(space.mesh)
    ref_sides = reference.cell_sides(space.mesh)

    m_omega = assemble_mass(space, region="omega")
    mass = assemble_mass(space)
    a_h = assemble_lame_form(space, material)
    s_star = assemble_grad_stiffness(space)
    gls = assemble_residual_penalty(space, material)

    s_gamma = params.gamma_gls * gls
    s_beta = None
    for j in range(1, p + 1):
        gj, bj = params.gammas[j - 1], params.betas[j - 1]
        if gj == 0.0 and bj == 0.0:
            continue
        jump = assemble_stress_jump(space, material, j)
        if gj != 0.0:
            s_gamma = s_gamma + gj * jump
        if bj != 0.0:
            s_beta = bj * jump if s_beta is None else s_beta + bj * jump
    s_alpha = (params.alpha * space.h ** (2 * p)) * mass

    blocks = {
        "omega_mass": m_omega,
        "mass": mass,
        "lame": a_h,
        "s_star": s_star,
        "gls": gls,
        "s_gamma": s_gamma,
        "s_alpha": s_alpha,
        "s_beta": s_beta,
        "div_div": None,
    }

    # data-side vectors
    def u_omega(pts, sides):
        return reference.displacement(pts, side=sides)

    def source(pts, sides):
        return reference.source(material, pts, side=sides)

    b_u = assemble_load(space, u_omega, region="omega", sides=ref_sides)
    b_u += params.gamma_gls * assemble_residual_penalty_rhs(space, material, reference)
    b_z_full = assemble_load(space, source, sides=ref_sides)

    if perturbation is not None:
        cross = assemble_residual_penalty_cross(space, material)
        b_u += m_omega @ perturbation.du
        b_u += params.gamma_gls * (cross @ perturbation.df)
        b_z_full += mass @ perturbation.df

    k11 = m_omega + s_gamma + s_alpha
    if divergence_data:
        div_div = assemble_div_div(space)
        blocks["div_div"] = div_div
        k11 = k11 + div_div

        def div_trace(pts, sides):
            return reference.divergence(pts, side=sides)

        b_u += assemble_div_load(space, div_trace, sides=ref_sides)

    cross_block = a_h if s_beta is None else a_h + s_beta
    dual = space.dofmap.interior_vector_dofs
    if problem_kind == "well-posed-dirichlet":
        constrained, g = space.boundary_values(reference)
        free_mask = np.ones(space.n_dofs, dtype=bool)
        free_mask[constrained] = False
        primal_free = np.flatnonzero(free_mask)
    else:
        constrained = np.array([], dtype=np.int64)
        g = np.array([])
        primal_free = np.arange(space.n_dofs)

    k11_r = k11[primal_free][:, primal_free]
    k12_r = cross_block[primal_free][:, dual]
    k21_r = cross_block[dual][:, primal_free]
    k22_r = -s_star[dual][:, dual]
    matrix = sp.bmat([[k11_r, k12_r], [k21_r, k22_r]], format="csc")

    b1 = b_u[primal_free]
    b2 = b_z_full[dual]
    if len(constrained):
        b1 = b1 - k11[primal_free][:, constrained] @ g
        b2 = b2 - cross_block[dual][:, constrained] @ g
    rhs = np.concatenate([b1, b2])

    return SaddleSystem(space, blocks, matrix, rhs, primal_free, dual, constrained, g)
