"""Lagrange bases on the reference triangle and quadrature rules.

The reference triangle is {(x, y) : x >= 0, y >= 0, x + y <= 1}.  Partial
derivatives of a given total order m are stored along a leading axis indexed
by the number of y-derivatives, i.e. order 2 is laid out as (dxx, dxy, dyy).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

MAX_DEGREE = 3


def _monomial_exponents(p):
    return [(t - b, b) for t in range(p + 1) for b in range(t + 1)]


def _reference_nodes(p):
    """Equispaced Lagrange nodes: vertices, then edge nodes, then interior."""
    verts = np.array([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)])
    nodes = [verts[0], verts[1], verts[2]]
    for a, b in ((0, 1), (1, 2), (2, 0)):
        for i in range(1, p):
            nodes.append(verts[a] + (i / p) * (verts[b] - verts[a]))
    for i in range(1, p):
        for j in range(1, p - i):
            nodes.append(np.array((i / p, j / p)))
    return np.array(nodes)


class ReferenceElement:
    """Nodal scalar Lagrange basis of degree p with exact derivatives."""

    def __init__(self, degree):
        if not 1 <= degree <= MAX_DEGREE:
            raise ValueError(f"degree must be in 1..{MAX_DEGREE}, got {degree}")
        self.degree = degree
        self.nodes = _reference_nodes(degree)
        self.exponents = _monomial_exponents(degree)
        self.n_basis = len(self.exponents)
        assert self.n_basis == (degree + 1) * (degree + 2) // 2
        vand = np.empty((self.n_basis, self.n_basis))
        for m, (a, b) in enumerate(self.exponents):
            vand[:, m] = self.nodes[:, 0] ** a * self.nodes[:, 1] ** b
        self._coeff = np.linalg.inv(vand)  # column j: monomial coeffs of phi_j

    def eval(self, points, order):
        """All partial derivatives of the given total order at `points`.

        Returns an array of shape (order + 1, n_points, n_basis); the leading
        index counts y-derivatives.  Derivatives of order > p vanish
        identically, so requesting them signals a caller bug and raises.
        """
        if not 0 <= order <= self.degree:
            raise ValueError(
                f"derivative order {order} outside 0..{self.degree}"
            )
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        x, y = pts[:, 0], pts[:, 1]
        out = np.zeros((order + 1, len(pts), self.n_basis))
        for d in range(order + 1):
            da, db = order - d, d
            mono = np.zeros((len(pts), self.n_basis))
            for m, (a, b) in enumerate(self.exponents):
                if a < da or b < db:
                    continue
                c = (math.factorial(a) // math.factorial(a - da)) * (
                    math.factorial(b) // math.factorial(b - db)
                )
                mono[:, m] = c * x ** (a - da) * y ** (b - db)
            out[d] = mono @ self._coeff
        return out


@lru_cache(maxsize=None)
def reference_element(degree):
    return ReferenceElement(degree)


def eval_basis(p, point, order):
    """Derivatives of all degree-p basis functions at a reference point.

    `point` must lie in the closed reference triangle.  Shape of the result
    is (order + 1, n_basis) for a single point, (order + 1, n, n_basis) for
    an array of points.
    """
    pts = np.asarray(point, dtype=float)
    single = pts.ndim == 1
    pts2 = np.atleast_2d(pts)
    tol = 1e-12
    inside = (pts2[:, 0] >= -tol) & (pts2[:, 1] >= -tol) & (
        pts2[:, 0] + pts2[:, 1] <= 1.0 + tol
    )
    if not inside.all():
        raise ValueError("point outside the closed reference triangle")
    vals = reference_element(p).eval(pts2, order)
    return vals[:, 0, :] if single else vals


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    points: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    degree: int


@lru_cache(maxsize=None)
def triangle_quadrature(required_degree):
    """Rule exact to at least `required_degree` on the reference triangle."""
    if required_degree < 0:
        raise ValueError("required_degree must be >= 0")
    if required_degree <= 1:
        pts = np.array([[1 / 3, 1 / 3]])
        wts = np.array([0.5])
        return QuadratureRule(pts, wts, 1)
    if required_degree == 2:
        pts = np.array([[1 / 6, 1 / 6], [2 / 3, 1 / 6], [1 / 6, 2 / 3]])
        wts = np.full(3, 1 / 6)
        return QuadratureRule(pts, wts, 2)
    # collapsed tensor Gauss rule (Duffy map x = s(1-t), y = t, jacobian 1-t)
    n = math.ceil((required_degree + 2) / 2)
    gp, gw = np.polynomial.legendre.leggauss(n)
    s, ws = (gp + 1) / 2, gw / 2
    pts, wts = [], []
    for ti, wi in zip(s, ws):
        for sj, wj in zip(s, ws):
            pts.append((sj * (1 - ti), ti))
            wts.append(wj * wi * (1 - ti))
    return QuadratureRule(np.array(pts), np.array(wts), required_degree)


@lru_cache(maxsize=None)
def segment_quadrature(required_degree):
    """Gauss rule on [0, 1] exact to at least `required_degree`."""
    if required_degree < 0:
        raise ValueError("required_degree must be >= 0")
    n = max(1, math.ceil((required_degree + 1) / 2))
    gp, gw = np.polynomial.legendre.leggauss(n)
    return QuadratureRule((gp + 1) / 2, gw / 2, 2 * n - 1)
