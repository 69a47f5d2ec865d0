"""Fitted structured triangulations of the unit square with region tags.

Meshes are tensor grids of rectangles, each split along the diagonal from
its lower-left to its upper-right corner.  All subdomain boundaries and
coefficient interfaces used by the experiments are axis-aligned lines, so a
mesh whose breakpoints contain those coordinates is fitted by construction
and stays fitted under uniform (red) refinement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GEOM_TOL = 1e-12


@dataclass(frozen=True)
class Rectangle:
    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError(f"degenerate rectangle {self}")

    def contains(self, pts):
        pts = np.asarray(pts, dtype=float)
        x, y = pts[..., 0], pts[..., 1]
        t = GEOM_TOL
        return (
            (x >= self.x0 - t)
            & (x <= self.x1 + t)
            & (y >= self.y0 - t)
            & (y <= self.y1 + t)
        )

    def strictly_inside(self, pts):
        pts = np.asarray(pts, dtype=float)
        x, y = pts[..., 0], pts[..., 1]
        t = GEOM_TOL
        return (
            (x > self.x0 + t)
            & (x < self.x1 - t)
            & (y > self.y0 + t)
            & (y < self.y1 - t)
        )

    def strictly_outside(self, pts):
        pts = np.asarray(pts, dtype=float)
        x, y = pts[..., 0], pts[..., 1]
        t = GEOM_TOL
        return (x < self.x0 - t) | (x > self.x1 + t) | (y < self.y0 - t) | (y > self.y1 + t)


@dataclass(frozen=True)
class RegionSpec:
    """Union of axis-aligned rectangles, optionally complemented in the square."""

    rectangles: tuple[Rectangle, ...]
    complement: bool = False

    def contains(self, pts):
        pts = np.asarray(pts, dtype=float)
        inside = np.zeros(pts.shape[:-1], dtype=bool)
        for rect in self.rectangles:
            inside |= rect.contains(pts)
        return ~inside if self.complement else inside


def _cells_cut_by_segment(verts, axis, coord, lo, hi):
    """Cells whose interior is crossed by the axis-aligned segment.

    `axis` = 0 means the line {x = coord}, 1 the line {y = coord}; (lo, hi)
    is the segment extent along the other axis.  The intersection of a
    straight line with a triangle is an interval whose endpoints lie on the
    triangle's edges, so the test is exact.
    """
    t = GEOM_TOL
    a = verts[..., axis]
    other = verts[..., 1 - axis]
    straddles = (a.min(axis=1) < coord - t) & (a.max(axis=1) > coord + t)
    if not straddles.any():
        return straddles

    span_lo = np.full(len(verts), np.inf)
    span_hi = np.full(len(verts), -np.inf)
    for i, j in ((0, 1), (1, 2), (2, 0)):
        ai, aj = a[:, i], a[:, j]
        oi, oj = other[:, i], other[:, j]
        crosses = (np.minimum(ai, aj) - t <= coord) & (coord <= np.maximum(ai, aj) + t)
        denom = aj - ai
        safe = np.abs(denom) > t
        frac = np.where(safe, (coord - ai) / np.where(safe, denom, 1.0), 0.0)
        val = oi + frac * (oj - oi)
        hit = crosses & safe
        span_lo = np.where(hit, np.minimum(span_lo, val), span_lo)
        span_hi = np.where(hit, np.maximum(span_hi, val), span_hi)
    overlap = np.minimum(span_hi, hi) - np.maximum(span_lo, lo)
    return straddles & (overlap > t)


class Mesh:
    """Conforming triangulation; immutable after construction."""

    def __init__(self, vertices, cells, refinement_level=0, region_specs=None):
        self.vertices = np.asarray(vertices, dtype=float)
        self.cells = np.asarray(cells, dtype=np.int64)
        self.refinement_level = refinement_level
        self.region_specs = dict(region_specs or {})

        v = self.vertices[self.cells]
        e1 = v[:, 1] - v[:, 0]
        e2 = v[:, 2] - v[:, 0]
        signed = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
        if np.any(signed <= 0):
            raise ValueError("all cells must be counterclockwise with positive area")
        self._areas = signed
        self._centroids = v.mean(axis=1)
        edge_len = np.stack(
            [
                np.linalg.norm(v[:, 1] - v[:, 0], axis=1),
                np.linalg.norm(v[:, 2] - v[:, 1], axis=1),
                np.linalg.norm(v[:, 0] - v[:, 2], axis=1),
            ],
            axis=1,
        )
        self.h = float(edge_len.max())

        self._build_facets()
        self.cell_regions = {
            name: self._tag(spec) for name, spec in self.region_specs.items()
        }

    # -- topology -----------------------------------------------------------

    def _build_facets(self):
        edge_cells: dict[tuple[int, int], list[int]] = {}
        edge_order: list[tuple[int, int]] = []
        for c, (a, b, d) in enumerate(self.cells):
            for u, w in ((a, b), (b, d), (d, a)):
                key = (u, w) if u < w else (w, u)
                if key not in edge_cells:
                    edge_cells[key] = []
                    edge_order.append(key)
                edge_cells[key].append(c)

        interior, int_cells, boundary, bnd_cells = [], [], [], []
        for key in edge_order:
            adj = edge_cells[key]
            if len(adj) == 2:
                interior.append(key)
                int_cells.append(adj)
            elif len(adj) == 1:
                boundary.append(key)
                bnd_cells.append(adj[0])
            else:
                raise ValueError("facet shared by more than two cells")

        self.interior_facets = np.array(interior, dtype=np.int64).reshape(-1, 2)
        self.interior_facet_cells = np.array(int_cells, dtype=np.int64).reshape(-1, 2)
        self.boundary_facets = np.array(boundary, dtype=np.int64).reshape(-1, 2)
        self.boundary_facet_cells = np.array(bnd_cells, dtype=np.int64)

        # unit normal oriented from the first adjacent cell to the second
        if len(self.interior_facets):
            va = self.vertices[self.interior_facets[:, 0]]
            vb = self.vertices[self.interior_facets[:, 1]]
            tang = vb - va
            tang /= np.linalg.norm(tang, axis=1)[:, None]
            nrm = np.stack([tang[:, 1], -tang[:, 0]], axis=1)
            d = (
                self._centroids[self.interior_facet_cells[:, 1]]
                - self._centroids[self.interior_facet_cells[:, 0]]
            )
            flip = np.einsum("fi,fi->f", nrm, d) < 0
            nrm[flip] *= -1
            self.interior_facet_normals = nrm
        else:
            self.interior_facet_normals = np.zeros((0, 2))

    # -- regions ------------------------------------------------------------

    def _tag(self, spec):
        verts = self.vertices[self.cells]
        for rect in spec.rectangles:
            cut = np.zeros(self.n_cells, dtype=bool)
            for c, lo, hi in ((rect.x0, rect.y0, rect.y1), (rect.x1, rect.y0, rect.y1)):
                cut |= _cells_cut_by_segment(verts, 0, c, lo, hi)
            for c, lo, hi in ((rect.y0, rect.x0, rect.x1), (rect.y1, rect.x0, rect.x1)):
                cut |= _cells_cut_by_segment(verts, 1, c, lo, hi)
            if cut.any():
                raise ValueError(
                    f"rectangle {rect} is not fitted: its boundary cuts "
                    f"{int(cut.sum())} cell(s)"
                )
        return spec.contains(self._centroids)

    def region_cells(self, name):
        if name not in self.cell_regions:
            raise ValueError(f"region {name!r} not tagged on this mesh")
        return np.flatnonzero(self.cell_regions[name])

    # -- queries ------------------------------------------------------------

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_cells(self):
        return len(self.cells)

    def cell_areas(self):
        return self._areas.copy()

    def cell_centroids(self):
        return self._centroids.copy()

    def dump_text(self, path):
        """Plain-text dump: one vertex / cell / tag record per line."""
        with open(path, "w", encoding="ascii") as fh:
            for i, (x, y) in enumerate(self.vertices):
                fh.write(f"v {i} {x!r} {y!r}\n")
            for i, (a, b, c) in enumerate(self.cells):
                fh.write(f"c {i} {a} {b} {c}\n")
            for name in self.cell_regions:
                for c in self.region_cells(name):
                    fh.write(f"t {name} {c}\n")


def build_fitted_mesh(breakpoints_x, breakpoints_y):
    """Tensor-grid triangulation of the unit square.

    Each rectangle is split along the diagonal from its lower-left to its
    upper-right corner, so every breakpoint line is a union of facets.
    """
    bx = np.asarray(breakpoints_x, dtype=float)
    by = np.asarray(breakpoints_y, dtype=float)
    for name, b in (("x", bx), ("y", by)):
        if b.ndim != 1 or len(b) < 2:
            raise ValueError(f"need at least two {name}-breakpoints")
        if not np.all(np.diff(b) > 0):
            raise ValueError(f"{name}-breakpoints must be strictly increasing")
        if abs(b[0]) > GEOM_TOL or abs(b[-1] - 1) > GEOM_TOL:
            raise ValueError(f"{name}-breakpoints must start at 0 and end at 1")

    nx, ny = len(bx), len(by)
    xx, yy = np.meshgrid(bx, by, indexing="xy")
    vertices = np.column_stack([xx.ravel(), yy.ravel()])

    def vid(i, j):
        return j * nx + i

    cells = []
    for j in range(ny - 1):
        for i in range(nx - 1):
            ll, lr = vid(i, j), vid(i + 1, j)
            ul, ur = vid(i, j + 1), vid(i + 1, j + 1)
            cells.append((ll, lr, ur))
            cells.append((ll, ur, ul))
    return Mesh(vertices, np.array(cells, dtype=np.int64))


def refine_uniform(mesh):
    """Red refinement: each triangle split into 4 congruent children."""
    midpoint_id: dict[tuple[int, int], int] = {}
    new_vertices = [mesh.vertices]
    mids = []
    next_id = mesh.n_vertices

    def mid(a, b):
        nonlocal next_id
        key = (a, b) if a < b else (b, a)
        if key not in midpoint_id:
            midpoint_id[key] = next_id
            mids.append(0.5 * (mesh.vertices[key[0]] + mesh.vertices[key[1]]))
            next_id += 1
        return midpoint_id[key]

    children = []
    for a, b, c in mesh.cells:
        mab, mbc, mca = mid(a, b), mid(b, c), mid(c, a)
        children.extend(
            [(a, mab, mca), (mab, b, mbc), (mca, mbc, c), (mab, mbc, mca)]
        )
    if mids:
        new_vertices.append(np.array(mids))
    return Mesh(
        np.vstack(new_vertices),
        np.array(children, dtype=np.int64),
        refinement_level=mesh.refinement_level + 1,
        region_specs=mesh.region_specs,
    )


def tag_regions(mesh, geometry):
    """Attach named region tags (centroid containment) to a fitted mesh."""
    specs = dict(mesh.region_specs)
    specs.update(geometry)
    return Mesh(
        mesh.vertices,
        mesh.cells,
        refinement_level=mesh.refinement_level,
        region_specs=specs,
    )
