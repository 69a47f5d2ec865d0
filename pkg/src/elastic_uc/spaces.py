"""Scalar and vector Lagrange dof maps over a fitted mesh.

Scalar dofs are numbered vertices first, then (p-1) per edge along the
edge's canonical direction (low vertex id to high), then cell-interior
nodes.  Vector dofs interleave the two displacement components:
vector dof = 2 * scalar dof + component.
"""

from __future__ import annotations

import numpy as np

from .elements import reference_element


class DofMap:
    def __init__(self, mesh, p):
        self.mesh = mesh
        self.p = p
        nv = mesh.n_vertices
        nc = mesh.n_cells
        n_edge_dofs = p - 1
        n_int = (p - 1) * (p - 2) // 2
        n_loc = (p + 1) * (p + 2) // 2

        edge_id: dict[tuple[int, int], int] = {}
        local_edges = ((0, 1), (1, 2), (2, 0))
        cell_dofs = np.empty((nc, n_loc), dtype=np.int64)
        cell_dofs[:, :3] = mesh.cells

        for c, tri in enumerate(mesh.cells):
            for e, (la, lb) in enumerate(local_edges):
                ga, gb = int(tri[la]), int(tri[lb])
                key = (ga, gb) if ga < gb else (gb, ga)
                eid = edge_id.setdefault(key, len(edge_id))
                base = nv + eid * n_edge_dofs
                for r in range(n_edge_dofs):
                    canonical_r = r if ga < gb else n_edge_dofs - 1 - r
                    cell_dofs[c, 3 + e * n_edge_dofs + r] = base + canonical_r
        n_edges = len(edge_id)
        int_base = nv + n_edges * n_edge_dofs
        for c in range(nc):
            for r in range(n_int):
                cell_dofs[c, 3 + 3 * n_edge_dofs + r] = int_base + c * n_int + r

        self.n_scalar = int_base + nc * n_int
        self.n_vector = 2 * self.n_scalar
        self.cell_dofs = cell_dofs
        self._edge_id = edge_id

        # physical node coordinates (shared nodes written identically)
        ref_nodes = reference_element(p).nodes
        verts = mesh.vertices[mesh.cells]
        v0 = verts[:, 0]
        jac = np.stack([verts[:, 1] - v0, verts[:, 2] - v0], axis=-1)
        phys = v0[:, None, :] + np.einsum("cij,nj->cni", jac, ref_nodes)
        coords = np.empty((self.n_scalar, 2))
        coords[cell_dofs.ravel()] = phys.reshape(-1, 2)
        self.node_coords = coords

        # boundary dofs: nodes lying on the domain boundary
        bdofs = set()
        for (a, b), cell in zip(mesh.boundary_facets, mesh.boundary_facet_cells):
            bdofs.add(int(a))
            bdofs.add(int(b))
            key = (int(a), int(b)) if a < b else (int(b), int(a))
            base = nv + edge_id[key] * n_edge_dofs
            bdofs.update(range(base, base + n_edge_dofs))
        self.boundary_scalar_dofs = np.array(sorted(bdofs), dtype=np.int64)
        mask = np.zeros(self.n_scalar, dtype=bool)
        mask[self.boundary_scalar_dofs] = True
        self.interior_scalar_dofs = np.flatnonzero(~mask)

        vd = np.empty((nc, 2 * n_loc), dtype=np.int64)
        vd[:, 0::2] = 2 * cell_dofs
        vd[:, 1::2] = 2 * cell_dofs + 1
        self.cell_vector_dofs = vd
        self.boundary_vector_dofs = np.sort(
            np.concatenate([2 * self.boundary_scalar_dofs, 2 * self.boundary_scalar_dofs + 1])
        )
        self.interior_vector_dofs = np.sort(
            np.concatenate([2 * self.interior_scalar_dofs, 2 * self.interior_scalar_dofs + 1])
        )


class FunctionSpace:
    """Vector Lagrange space [X_h^p]^2 with cached cell geometry."""

    def __init__(self, mesh, p):
        self.mesh = mesh
        self.p = p
        self.element = reference_element(p)
        self.dofmap = DofMap(mesh, p)

        verts = mesh.vertices[mesh.cells]
        self.cell_origin = verts[:, 0].copy()
        self.jacobian = np.stack(
            [verts[:, 1] - verts[:, 0], verts[:, 2] - verts[:, 0]], axis=-1
        )
        self.det_jacobian = (
            self.jacobian[:, 0, 0] * self.jacobian[:, 1, 1]
            - self.jacobian[:, 0, 1] * self.jacobian[:, 1, 0]
        )
        inv = np.empty_like(self.jacobian)
        inv[:, 0, 0] = self.jacobian[:, 1, 1]
        inv[:, 1, 1] = self.jacobian[:, 0, 0]
        inv[:, 0, 1] = -self.jacobian[:, 0, 1]
        inv[:, 1, 0] = -self.jacobian[:, 1, 0]
        inv /= self.det_jacobian[:, None, None]
        self.inv_jacobian = inv
        self.grad_map = np.swapaxes(inv, 1, 2)  # J^{-T}: ref grad -> phys grad

    @property
    def h(self):
        return self.mesh.h

    @property
    def n_dofs(self):
        return self.dofmap.n_vector

    def physical_points(self, ref_points, cells=None):
        """Map reference points (q, 2) to physical coordinates (nc, q, 2)."""
        cells = slice(None) if cells is None else cells
        return self.cell_origin[cells][:, None, :] + np.einsum(
            "cij,qj->cqi", self.jacobian[cells], np.atleast_2d(ref_points)
        )

    def reference_points(self, phys, cells):
        """Pull physical points (n, q, 2) back to the cells' reference coords."""
        rel = phys - self.cell_origin[cells][:, None, :]
        return np.einsum("cij,cqj->cqi", self.inv_jacobian[cells], rel)

    def interpolate(self, solution):
        """Nodal interpolation of a reference-solution-like object."""
        pts = self.dofmap.node_coords
        vals = solution.displacement(pts, side=solution.side(pts))
        coeffs = np.empty(self.n_dofs)
        coeffs[0::2] = vals[:, 0]
        coeffs[1::2] = vals[:, 1]
        return coeffs

    def boundary_values(self, solution):
        """Constrained boundary vector dofs and their interpolated values."""
        bdofs = self.dofmap.boundary_vector_dofs
        full = self.interpolate(solution)
        return bdofs, full[bdofs]
