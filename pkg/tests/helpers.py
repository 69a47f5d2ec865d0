"""Shared test utilities: finite-difference oracles and duck-typed fields."""

from __future__ import annotations

import numpy as np

# 4th-order central first-derivative stencil
_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])
_WEIGHTS = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0


def fd_derivative(fn, pts, direction, step):
    """4th-order central difference of fn along one coordinate."""
    acc = None
    for o, w in zip(_OFFSETS, _WEIGHTS):
        shifted = np.array(pts, dtype=float)
        shifted[..., direction] += o * step
        val = w * np.asarray(fn(shifted))
        acc = val if acc is None else acc + val
    return acc / step


def fd_gradient(fn, pts, step=1e-5):
    """Gradient d_j f_i of a vector field, shape (..., 2, 2)."""
    cols = [fd_derivative(fn, pts, d, step) for d in (0, 1)]
    return np.stack(cols, axis=-1)


def fd_source(solution, material, pts, side, step=1e-3):
    """Finite-difference application of -div(sigma(u)) - rho u.

    Fully independent of the analytic source: the stress is built from
    finite-difference displacement gradients and its divergence is again
    differenced.  The branch (side) is frozen so stencils never mix branches.
    """
    pts = np.asarray(pts, dtype=float)

    def displacement(x):
        return solution.displacement(x, side=side)

    def sigma(x):
        g = fd_gradient(displacement, x, step)
        vals = material.evaluate(x, side=side, order=0)
        eps = 0.5 * (g + np.swapaxes(g, -1, -2))
        div = g[..., 0, 0] + g[..., 1, 1]
        sig = 2 * vals.mu[..., None, None] * eps
        sig[..., 0, 0] += vals.lam * div
        sig[..., 1, 1] += vals.lam * div
        return sig

    div_sigma = np.zeros(pts.shape[:-1] + (2,))
    for j in (0, 1):
        div_sigma += fd_derivative(lambda x: sigma(x)[..., :, j], pts, j, step)
    vals = material.evaluate(pts, side=side, order=0)
    return -div_sigma - vals.rho * displacement(pts)


class FieldSolution:
    """Duck-typed reference solution built from callables (tests only)."""

    def __init__(self, u_fn, grad_fn=None, hess_fn=None):
        self._u = u_fn
        self._g = grad_fn
        self._h = hess_fn
        self.variant = "test-field"

    def side(self, pts):
        pts = np.asarray(pts, dtype=float)
        return np.zeros(pts.shape[:-1])

    def cell_sides(self, mesh):
        return np.zeros(mesh.n_cells)

    def displacement(self, pts, side=None):
        return self._u(np.asarray(pts, dtype=float))

    def gradient(self, pts, side=None):
        return self._g(np.asarray(pts, dtype=float))

    def hessian(self, pts, side=None):
        return self._h(np.asarray(pts, dtype=float))

    def divergence(self, pts, side=None):
        g = self.gradient(pts, side)
        return g[..., 0, 0] + g[..., 1, 1]


def zero_solution():
    def u(pts):
        return np.zeros(pts.shape[:-1] + (2,))

    def g(pts):
        return np.zeros(pts.shape[:-1] + (2, 2))

    def h(pts):
        return np.zeros(pts.shape[:-1] + (2, 3))

    sol = FieldSolution(u, g, h)
    sol.source = lambda material, pts, side=None: np.zeros(
        np.asarray(pts).shape[:-1] + (2,)
    )
    return sol


def poly_solution(p):
    """Vector field with polynomial components of total degree p."""

    if p == 1:
        cx = [(1.0, (0, 0)), (2.0, (1, 0)), (-0.5, (0, 1))]
        cy = [(0.5, (0, 0)), (-1.0, (1, 0)), (3.0, (0, 1))]
    elif p == 2:
        cx = [(1.0, (0, 0)), (2.0, (1, 0)), (-0.5, (0, 1)), (1.5, (2, 0)), (-2.0, (1, 1)), (0.75, (0, 2))]
        cy = [(0.5, (0, 0)), (-1.0, (1, 0)), (3.0, (0, 1)), (-0.25, (2, 0)), (1.0, (1, 1)), (2.0, (0, 2))]
    else:
        cx = [(1.0, (0, 0)), (2.0, (1, 0)), (1.5, (2, 0)), (-2.0, (1, 1)), (0.5, (3, 0)), (-1.0, (1, 2))]
        cy = [(0.5, (0, 0)), (3.0, (0, 1)), (0.75, (0, 2)), (1.0, (1, 1)), (-0.5, (0, 3)), (2.0, (2, 1))]

    def evaluate(coeffs, pts, da=0, db=0):
        x, y = pts[..., 0], pts[..., 1]
        import math

        total = np.zeros(pts.shape[:-1])
        for c, (a, b) in coeffs:
            if a < da or b < db:
                continue
            fac = (
                math.factorial(a)
                // math.factorial(a - da)
                * (math.factorial(b) // math.factorial(b - db))
            )
            total += c * fac * x ** (a - da) * y ** (b - db)
        return total

    def u(pts):
        return np.stack([evaluate(cx, pts), evaluate(cy, pts)], axis=-1)

    def g(pts):
        rows = []
        for coeffs in (cx, cy):
            rows.append(
                np.stack(
                    [evaluate(coeffs, pts, 1, 0), evaluate(coeffs, pts, 0, 1)], axis=-1
                )
            )
        return np.stack(rows, axis=-2)

    def h(pts):
        rows = []
        for coeffs in (cx, cy):
            rows.append(
                np.stack(
                    [
                        evaluate(coeffs, pts, 2, 0),
                        evaluate(coeffs, pts, 1, 1),
                        evaluate(coeffs, pts, 0, 2),
                    ],
                    axis=-1,
                )
            )
        return np.stack(rows, axis=-2)

    return FieldSolution(u, g, h)
