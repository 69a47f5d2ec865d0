"""Closed-form reference solutions, manufactured sources, and traces.

Each variant provides displacement, gradient, and Hessian in closed form;
the manufactured right-hand side applies the elastic operator

    L u = -div(sigma(u)) - rho u,   sigma(u) = 2 mu E(u) + lambda div(u) I

to these via the product rule with analytic coefficient gradients.  Hessians
are laid out as (dxx, dxy, dyy) per displacement component.
"""

from __future__ import annotations

import numpy as np

from .mesh import Rectangle


def lame_apply(vals, u, grad, hess):
    """Apply -div(sigma(.)) - rho(.) given pointwise fields and derivatives.

    grad[..., i, j] = d_j u_i, hess[..., i, m] with m over (xx, xy, yy).
    """
    div = grad[..., 0, 0] + grad[..., 1, 1]
    ddiv_x = hess[..., 0, 0] + hess[..., 1, 1]
    ddiv_y = hess[..., 0, 1] + hess[..., 1, 2]
    lap0 = hess[..., 0, 0] + hess[..., 0, 2]
    lap1 = hess[..., 1, 0] + hess[..., 1, 2]
    eps = 0.5 * (grad + np.swapaxes(grad, -1, -2))

    div_sigma_x = (
        2 * (vals.dmu[..., 0] * eps[..., 0, 0] + vals.dmu[..., 1] * eps[..., 0, 1])
        + vals.mu * (ddiv_x + lap0)
        + vals.dlam[..., 0] * div
        + vals.lam * ddiv_x
    )
    div_sigma_y = (
        2 * (vals.dmu[..., 0] * eps[..., 1, 0] + vals.dmu[..., 1] * eps[..., 1, 1])
        + vals.mu * (ddiv_y + lap1)
        + vals.dlam[..., 1] * div
        + vals.lam * ddiv_y
    )
    div_sigma = np.stack([div_sigma_x, div_sigma_y], axis=-1)
    return -div_sigma - vals.rho * u


def stress(vals, grad):
    """Pointwise stress tensor sigma(u) from the displacement gradient."""
    eps = 0.5 * (grad + np.swapaxes(grad, -1, -2))
    div = grad[..., 0, 0] + grad[..., 1, 1]
    sig = 2 * vals.mu[..., None, None] * eps
    sig[..., 0, 0] += vals.lam * div
    sig[..., 1, 1] += vals.lam * div
    return sig


def jump_coefficients(mu_plus, mu_minus, eta, k):
    """Polynomial coefficients matching displacement and traction at y = eta."""
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0, 1)")
    if mu_plus <= 0 or mu_minus <= 0:
        raise ValueError("shear moduli must be positive")
    b1 = 0.0
    c1 = (k * np.pi / (2 * eta)) * (mu_plus - mu_minus) / mu_plus
    a1 = 1.0 - c1 * eta**2
    b2 = 1.0
    c2 = -1.0 / (2 * eta)
    a2 = 1.0 - b2 * eta - c2 * eta**2
    return a1, b1, c1, a2, b2, c2


class ReferenceSolution:
    """Closed-form displacement field for one experiment scenario."""

    def __init__(self, variant, k, **params):
        if variant not in ("oscillatory", "plane_jump", "inclusion"):
            raise ValueError(f"unknown reference solution variant {variant!r}")
        self.variant = variant
        self.k = float(k)
        self.params = params

    @classmethod
    def oscillatory(cls, k):
        """u = sin(k pi x) sin(k pi y) (1, 1)."""
        return cls("oscillatory", k)

    @classmethod
    def plane_jump(cls, mu_plus, mu_minus, eta, k, coeffs=None):
        if coeffs is None:
            coeffs = jump_coefficients(mu_plus, mu_minus, eta, k)
        return cls(
            "plane_jump",
            k,
            eta=float(eta),
            mu_plus=float(mu_plus),
            mu_minus=float(mu_minus),
            coeffs=tuple(coeffs),
        )

    @classmethod
    def inclusion(cls, rect, k):
        if not isinstance(rect, Rectangle):
            rect = Rectangle(*rect)
        return cls("inclusion", k, rect=rect)

    # -- sides ---------------------------------------------------------------

    def side(self, pts):
        pts = np.asarray(pts, dtype=float)
        if self.variant == "plane_jump":
            return np.where(pts[..., 1] > self.params["eta"], 1.0, -1.0)
        if self.variant == "inclusion":
            return np.where(self.params["rect"].contains(pts), 1.0, -1.0)
        return np.zeros(pts.shape[:-1])

    def cell_sides(self, mesh):
        return self.side(mesh.cell_centroids())

    def _branch_mask(self, pts, side):
        if self.variant == "oscillatory":
            return None
        if side is None:
            raise ValueError(
                f"{self.variant} reference solution requires a cell side"
            )
        return np.broadcast_to(np.asarray(side, dtype=float) > 0, pts.shape[:-1])

    # -- fields ---------------------------------------------------------------

    def displacement(self, pts, side=None):
        pts = np.asarray(pts, dtype=float)
        u, _, _ = self._fields(pts, self._branch_mask(pts, side))
        return u

    def gradient(self, pts, side=None):
        pts = np.asarray(pts, dtype=float)
        _, g, _ = self._fields(pts, self._branch_mask(pts, side))
        return g

    def hessian(self, pts, side=None):
        pts = np.asarray(pts, dtype=float)
        _, _, h = self._fields(pts, self._branch_mask(pts, side))
        return h

    def divergence(self, pts, side=None):
        g = self.gradient(pts, side)
        return g[..., 0, 0] + g[..., 1, 1]

    def source(self, material, pts, side=None):
        """Manufactured f = L u with the given material model."""
        pts = np.asarray(pts, dtype=float)
        mask = self._branch_mask(pts, side)
        u, g, h = self._fields(pts, mask)
        vals = material.evaluate(pts, side=side, order=1)
        return lame_apply(vals, u, g, h)

    # -- closed forms ----------------------------------------------------------

    def _fields(self, pts, plus_mask):
        x, y = pts[..., 0], pts[..., 1]
        w = self.k * np.pi
        if self.variant == "oscillatory":
            sx, cx = np.sin(w * x), np.cos(w * x)
            sy, cy = np.sin(w * y), np.cos(w * y)
            val = sx * sy
            dx, dy = w * cx * sy, w * sx * cy
            dxx, dxy, dyy = -(w**2) * sx * sy, w**2 * cx * cy, -(w**2) * sx * sy
            u = np.stack([val, val], axis=-1)
            g = np.stack([dx, dy], axis=-1)[..., None, :] * np.ones((2, 1))
            h = np.stack([dxx, dxy, dyy], axis=-1)[..., None, :] * np.ones((2, 1))
            return u, g, h

        if self.variant == "plane_jump":
            eta = self.params["eta"]
            a1, b1, c1, a2, b2, c2 = self.params["coeffs"]
            sx, cx = np.sin(w * x), np.cos(w * x)
            # minus branch: trig in (y - eta)
            sy, cy = np.sin(w * (y - eta)), np.cos(w * (y - eta))
            um = np.stack([sx * cy, cx * cy], axis=-1)
            gm = np.empty(pts.shape[:-1] + (2, 2))
            gm[..., 0, 0] = w * cx * cy
            gm[..., 0, 1] = -w * sx * sy
            gm[..., 1, 0] = -w * sx * cy
            gm[..., 1, 1] = -w * cx * sy
            hm = np.empty(pts.shape[:-1] + (2, 3))
            hm[..., 0, 0] = -(w**2) * sx * cy
            hm[..., 0, 1] = -(w**2) * cx * sy
            hm[..., 0, 2] = -(w**2) * sx * cy
            hm[..., 1, 0] = -(w**2) * cx * cy
            hm[..., 1, 1] = w**2 * sx * sy
            hm[..., 1, 2] = -(w**2) * cx * cy
            # plus branch: polynomial in y times trig in x
            p1 = a1 + b1 * y + c1 * y**2
            p1d, p1dd = b1 + 2 * c1 * y, 2 * c1
            p2 = a2 + b2 * y + c2 * y**2
            p2d, p2dd = b2 + 2 * c2 * y, 2 * c2
            up = np.stack([p1 * sx, p2 * cx], axis=-1)
            gp = np.empty(pts.shape[:-1] + (2, 2))
            gp[..., 0, 0] = w * p1 * cx
            gp[..., 0, 1] = p1d * sx
            gp[..., 1, 0] = -w * p2 * sx
            gp[..., 1, 1] = p2d * cx
            hp = np.empty(pts.shape[:-1] + (2, 3))
            hp[..., 0, 0] = -(w**2) * p1 * sx
            hp[..., 0, 1] = w * p1d * cx
            hp[..., 0, 2] = p1dd * sx
            hp[..., 1, 0] = -(w**2) * p2 * cx
            hp[..., 1, 1] = -w * p2d * sx
            hp[..., 1, 2] = p2dd * cx
            m = plus_mask[..., None]
            return (
                np.where(m, up, um),
                np.where(m[..., None], gp, gm),
                np.where(m[..., None], hp, hm),
            )

        # inclusion: u = zeta^2 g with zeta = (x-xL)(x-xR)(y-yL)(y-yR)
        rect = self.params["rect"]
        X = (x - rect.x0) * (x - rect.x1)
        Xd = 2 * x - rect.x0 - rect.x1
        Y = (y - rect.y0) * (y - rect.y1)
        Yd = 2 * y - rect.y0 - rect.y1
        w2 = X**2 * Y**2
        w2x = 2 * X * Xd * Y**2
        w2y = 2 * X**2 * Y * Yd
        w2xx = 2 * Y**2 * (Xd**2 + 2 * X)
        w2yy = 2 * X**2 * (Yd**2 + 2 * Y)
        w2xy = 4 * X * Xd * Y * Yd

        sx, cx = np.sin(w * x), np.cos(w * x)
        sy, cy = np.sin(w * y), np.cos(w * y)
        u_out = np.empty(pts.shape[:-1] + (2, 2))
        g_out = np.empty(pts.shape[:-1] + (2, 2, 2))
        h_out = np.empty(pts.shape[:-1] + (2, 2, 3))
        for branch, ax in ((True, 0), (False, 1)):
            # inner branch uses cos(k pi x), outer uses sin(k pi x)
            tx, txd, txdd = (cx, -w * sx, -(w**2) * cx) if branch else (sx, w * cx, -(w**2) * sx)
            for comp, (ty, tyd, tydd) in enumerate(
                ((sy, w * cy, -(w**2) * sy), (cy, -w * sy, -(w**2) * cy))
            ):
                gval = tx * ty
                gx, gy = txd * ty, tx * tyd
                gxx, gyy, gxy = txdd * ty, tx * tydd, txd * tyd
                u_out[..., ax, comp] = w2 * gval
                g_out[..., ax, comp, 0] = w2x * gval + w2 * gx
                g_out[..., ax, comp, 1] = w2y * gval + w2 * gy
                h_out[..., ax, comp, 0] = w2xx * gval + 2 * w2x * gx + w2 * gxx
                h_out[..., ax, comp, 1] = w2xy * gval + w2x * gy + w2y * gx + w2 * gxy
                h_out[..., ax, comp, 2] = w2yy * gval + 2 * w2y * gy + w2 * gyy
        m = plus_mask[..., None]
        return (
            np.where(m, u_out[..., 0, :], u_out[..., 1, :]),
            np.where(m[..., None], g_out[..., 0, :, :], g_out[..., 1, :, :]),
            np.where(m[..., None], h_out[..., 0, :, :], h_out[..., 1, :, :]),
        )


def verify_interface_conditions(solution, lam, n_samples=100):
    """Max displacement / traction mismatch of a plane-jump solution at y = eta.

    The traction on the interface line {y = eta} uses the upward normal and
    the branch shear moduli; for a valid solution both maxima vanish.
    """
    if solution.variant != "plane_jump":
        raise ValueError("interface verification applies to plane-jump solutions")
    eta = solution.params["eta"]
    xs = np.linspace(0.0, 1.0, n_samples)
    pts = np.stack([xs, np.full_like(xs, eta)], axis=-1)

    up = solution.displacement(pts, side=np.ones(n_samples))
    um = solution.displacement(pts, side=-np.ones(n_samples))
    gp = solution.gradient(pts, side=np.ones(n_samples))
    gm = solution.gradient(pts, side=-np.ones(n_samples))

    def traction(g, mu):
        # normal (0, 1): t1 = mu (dy u1 + dx u2), t2 = 2 mu dy u2 + lam div u
        t1 = mu * (g[..., 0, 1] + g[..., 1, 0])
        t2 = 2 * mu * g[..., 1, 1] + lam * (g[..., 0, 0] + g[..., 1, 1])
        return np.stack([t1, t2], axis=-1)

    tp = traction(gp, solution.params["mu_plus"])
    tm = traction(gm, solution.params["mu_minus"])
    max_u = float(np.abs(up - um).max())
    max_t = float(np.abs(tp - tm).max())
    return max_u, max_t
