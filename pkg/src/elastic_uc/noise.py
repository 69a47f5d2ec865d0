"""Reproducible random data perturbations with exactly prescribed norms.

Both the measurement perturbation (supported on the data region) and the
source perturbation (over the whole domain) are piecewise-polynomial fields
in the same space as the test functions, drawn i.i.d. uniform on [-1, 1]
and rescaled so their assembled L2 norms equal amplitude * h^(p - theta).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class NoiseSpec:
    theta: int
    amplitude: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not (isinstance(self.theta, (int, np.integer)) and self.theta >= 0):
            raise ValueError("theta must be a non-negative integer")
        if self.amplitude < 0:
            raise ValueError("amplitude must be non-negative")


@dataclass(frozen=True, eq=False)
class Perturbation:
    du: np.ndarray
    df: np.ndarray
    spec: NoiseSpec
    target_norm: float


def make_perturbation(space, spec, omega_mass, full_mass):
    """Draw (du, df) with ||du||_omega = ||df||_Omega = amplitude * h^(p-theta)."""
    omega_cells = space.mesh.region_cells("omega")
    omega_dofs = np.unique(space.dofmap.cell_vector_dofs[omega_cells])
    if len(omega_dofs) == 0:
        raise ValueError("empty data-region dof set")

    target = spec.amplitude * space.h ** (space.p - spec.theta)
    rng = np.random.default_rng(spec.seed)

    du = np.zeros(space.n_dofs)
    du[omega_dofs] = rng.uniform(-1.0, 1.0, size=len(omega_dofs))
    df = rng.uniform(-1.0, 1.0, size=space.n_dofs)

    if spec.amplitude == 0.0:
        return Perturbation(np.zeros(space.n_dofs), np.zeros(space.n_dofs), spec, 0.0)

    nrm_u = float(np.sqrt(du @ (omega_mass @ du)))
    nrm_f = float(np.sqrt(df @ (full_mass @ df)))
    du *= target / nrm_u
    df *= target / nrm_f
    return Perturbation(du, df, spec, target)
