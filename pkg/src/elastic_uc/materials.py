"""Material parameter fields mu, lambda, rho for all experiment scenarios.

Discontinuous variants are evaluated per cell side so that interfaces align
with mesh facets; the side of a cell is decided by its centroid and must be
passed explicitly (evaluating a jump model without a side is an error).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mesh import Rectangle

_MIN_COEFF = 1e-10


@dataclass(frozen=True, eq=False)
class MaterialValues:
    mu: np.ndarray
    lam: np.ndarray
    rho: float
    dmu: np.ndarray
    dlam: np.ndarray
    d2mu: np.ndarray | None = field(default=None)
    d2lam: np.ndarray | None = field(default=None)


class MaterialModel:
    """Cellwise-smooth (mu, lambda, rho) with analytic derivatives.

    rho follows the convention rho = rho_sign * k**2; the default sign is
    negative, with a switch for the opposite convention.
    """

    def __init__(self, variant, k, rho_sign=-1.0, **params):
        if variant not in ("constant", "trigonometric", "plane_jump", "inclusion"):
            raise ValueError(f"unknown material variant {variant!r}")
        if rho_sign not in (-1.0, 1.0):
            raise ValueError("rho_sign must be +1 or -1")
        self.variant = variant
        self.k = float(k)
        self.rho_sign = float(rho_sign)
        self.params = params
        self._check_ellipticity()

    # -- constructors ---------------------------------------------------------

    @classmethod
    def constant(cls, mu, lam, k, rho_sign=-1.0):
        return cls("constant", k, rho_sign, mu=float(mu), lam=float(lam))

    @classmethod
    def trigonometric(cls, k, rho_sign=-1.0):
        """mu = 1 + sin(x)sin(y)/2, lambda = 1.25 + cos(x)cos(y)/2."""
        return cls("trigonometric", k, rho_sign)

    @classmethod
    def plane_jump(cls, mu_plus, mu_minus, eta, k, lam=1.25, rho_sign=-1.0):
        if not 0 < eta < 1:
            raise ValueError("interface height eta must lie in (0, 1)")
        return cls(
            "plane_jump",
            k,
            rho_sign,
            mu_plus=float(mu_plus),
            mu_minus=float(mu_minus),
            eta=float(eta),
            lam=float(lam),
        )

    @classmethod
    def inclusion(cls, mu_inner, mu_outer, rect, k, lam=1.25, rho_sign=-1.0):
        if not isinstance(rect, Rectangle):
            rect = Rectangle(*rect)
        return cls(
            "inclusion",
            k,
            rho_sign,
            mu_inner=float(mu_inner),
            mu_outer=float(mu_outer),
            rect=rect,
            lam=float(lam),
        )

    # -- basic properties -------------------------------------------------------

    @property
    def rho(self):
        return self.rho_sign * self.k**2

    @property
    def is_smooth(self):
        return self.variant in ("constant", "trigonometric")

    def _check_ellipticity(self):
        xs = np.linspace(0, 1, 21)
        pts = np.stack(np.meshgrid(xs, xs, indexing="xy"), axis=-1).reshape(-1, 2)
        sides = [None] if self.is_smooth else [np.ones(len(pts)), -np.ones(len(pts))]
        for s in sides:
            vals = self.evaluate(pts, side=s)
            if vals.mu.min() < _MIN_COEFF or (vals.lam + 2 * vals.mu).min() < _MIN_COEFF:
                raise ValueError("material violates mu > 0 and lambda + 2 mu > 0")

    # -- side bookkeeping ------------------------------------------------------

    def side(self, pts):
        """+1 / -1 side indicator for discontinuous variants, zeros otherwise."""
        pts = np.asarray(pts, dtype=float)
        if self.variant == "plane_jump":
            return np.where(pts[..., 1] > self.params["eta"], 1.0, -1.0)
        if self.variant == "inclusion":
            return np.where(self.params["rect"].contains(pts), 1.0, -1.0)
        return np.zeros(pts.shape[:-1])

    def cell_sides(self, mesh):
        return self.side(mesh.cell_centroids())

    # -- evaluation --------------------------------------------------------------

    def evaluate(self, pts, side=None, order=1):
        """Values and derivatives of mu, lambda at `pts` (within one cell side).

        `order` selects how many derivative levels are returned (0..2);
        second derivatives are laid out as (dxx, dxy, dyy).
        """
        pts = np.asarray(pts, dtype=float)
        shape = pts.shape[:-1]
        x, y = pts[..., 0], pts[..., 1]
        need_side = self.variant in ("plane_jump", "inclusion")
        if need_side and side is None:
            raise ValueError(
                f"{self.variant} material requires a cell side for evaluation"
            )

        if self.variant == "constant":
            mu = np.full(shape, self.params["mu"])
            lam = np.full(shape, self.params["lam"])
            dmu = np.zeros(shape + (2,))
            dlam = np.zeros(shape + (2,))
            d2mu = np.zeros(shape + (3,))
            d2lam = np.zeros(shape + (3,))
        elif self.variant == "trigonometric":
            sx, cx, sy, cy = np.sin(x), np.cos(x), np.sin(y), np.cos(y)
            mu = 1.0 + 0.5 * sx * sy
            lam = 1.25 + 0.5 * cx * cy
            dmu = np.stack([0.5 * cx * sy, 0.5 * sx * cy], axis=-1)
            dlam = np.stack([-0.5 * sx * cy, -0.5 * cx * sy], axis=-1)
            d2mu = np.stack(
                [-0.5 * sx * sy, 0.5 * cx * cy, -0.5 * sx * sy], axis=-1
            )
            d2lam = np.stack(
                [-0.5 * cx * cy, 0.5 * sx * sy, -0.5 * cx * cy], axis=-1
            )
        elif self.variant == "plane_jump":
            s = np.broadcast_to(np.asarray(side, dtype=float), shape)
            mu = np.where(s > 0, self.params["mu_plus"], self.params["mu_minus"])
            lam = np.full(shape, self.params["lam"])
            dmu = np.zeros(shape + (2,))
            dlam = np.zeros(shape + (2,))
            d2mu = np.zeros(shape + (3,))
            d2lam = np.zeros(shape + (3,))
        else:  # inclusion
            s = np.broadcast_to(np.asarray(side, dtype=float), shape)
            mu = np.where(s > 0, self.params["mu_inner"], self.params["mu_outer"])
            lam = np.full(shape, self.params["lam"])
            dmu = np.zeros(shape + (2,))
            dlam = np.zeros(shape + (2,))
            d2mu = np.zeros(shape + (3,))
            d2lam = np.zeros(shape + (3,))

        if order <= 1:
            return MaterialValues(mu, lam, self.rho, dmu, dlam)
        return MaterialValues(mu, lam, self.rho, dmu, dlam, d2mu, d2lam)
