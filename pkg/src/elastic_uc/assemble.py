"""Sparse assembly of every bilinear form and load vector of the method.

All matrices act on interleaved vector dofs (2 * scalar + component).  Cell
and facet loops are batched and evaluated with einsum; the batch size only
bounds memory, results are independent of it.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

from .elements import segment_quadrature, triangle_quadrature

CELL_BATCH = 8192
FACET_BATCH = 2048


def _batches(n, size):
    for s in range(0, n, size):
        yield s, min(n, s + size)


def _to_csr(rows, cols, vals, n, symmetrize=False):
    if not rows:
        return sp.csr_matrix((n, n))
    mat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    ).tocsr()
    if symmetrize:
        # forms are symmetric by definition; remove O(eps) contraction noise
        mat = (mat + mat.T) * 0.5
    return mat


def _default_degree(space):
    return 2 * space.p + 2


def _transform2(a):
    """Second-derivative pushforward (dxx, dxy, dyy) from A = J^{-T}."""
    t = np.empty(a.shape[:-2] + (3, 3))
    a00, a01, a10, a11 = a[..., 0, 0], a[..., 0, 1], a[..., 1, 0], a[..., 1, 1]
    t[..., 0, 0] = a00 * a00
    t[..., 0, 1] = 2 * a00 * a01
    t[..., 0, 2] = a01 * a01
    t[..., 1, 0] = a00 * a10
    t[..., 1, 1] = a00 * a11 + a01 * a10
    t[..., 1, 2] = a01 * a11
    t[..., 2, 0] = a10 * a10
    t[..., 2, 1] = 2 * a10 * a11
    t[..., 2, 2] = a11 * a11
    return t


def _transform3(a):
    """Third-derivative pushforward (dxxx, dxxy, dxyy, dyyy)."""
    t = np.empty(a.shape[:-2] + (4, 4))
    a00, a01, a10, a11 = a[..., 0, 0], a[..., 0, 1], a[..., 1, 0], a[..., 1, 1]
    t[..., 0, 0] = a00**3
    t[..., 0, 1] = 3 * a00**2 * a01
    t[..., 0, 2] = 3 * a00 * a01**2
    t[..., 0, 3] = a01**3
    t[..., 1, 0] = a00**2 * a10
    t[..., 1, 1] = a00**2 * a11 + 2 * a00 * a01 * a10
    t[..., 1, 2] = 2 * a00 * a01 * a11 + a01**2 * a10
    t[..., 1, 3] = a01**2 * a11
    t[..., 2, 0] = a00 * a10**2
    t[..., 2, 1] = 2 * a00 * a10 * a11 + a01 * a10**2
    t[..., 2, 2] = a00 * a11**2 + 2 * a01 * a10 * a11
    t[..., 2, 3] = a01 * a11**2
    t[..., 3, 0] = a10**3
    t[..., 3, 1] = 3 * a10**2 * a11
    t[..., 3, 2] = 3 * a10 * a11**2
    t[..., 3, 3] = a11**3
    return t


def _push_forward(space, cells, ref_tables, order):
    """Physical partials of the given order, shape (nc, order+1, q, nb)."""
    tab = ref_tables[order]
    if order == 0:
        return np.broadcast_to(tab[0], (len(cells),) + tab[0].shape)[:, None]
    amat = space.grad_map[cells]
    if order == 1:
        return np.einsum("cst,tqb->csqb", amat, tab)
    if order == 2:
        return np.einsum("cst,tqb->csqb", _transform2(amat), tab)
    return np.einsum("cst,tqb->csqb", _transform3(amat), tab)


def _basis_table(space, points, order):
    """Reference basis partials; identically zero above the polynomial degree."""
    if order > space.p:
        return np.zeros((order + 1, len(points), space.element.n_basis))
    return space.element.eval(points, order)


def _cell_tables(space, degree, max_order):
    rule = triangle_quadrature(degree)
    tables = {m: _basis_table(space, rule.points, m) for m in range(max_order + 1)}
    return rule, tables


def _expand_sides(sides, cells):
    if sides is None:
        return None
    return np.asarray(sides)[cells][:, None]


# -- cellwise bilinear forms --------------------------------------------------


def _assemble_cellwise(space, cells, degree, max_order, local_fn, symmetrize=True):
    """Generic batched cell assembly; local_fn returns (B, 2nb, 2nb) blocks."""
    rule, tables = _cell_tables(space, degree, max_order)
    nb = space.element.n_basis
    rows, cols, vals = [], [], []
    for s, e in _batches(len(cells), CELL_BATCH):
        batch = cells[s:e]
        wdet = rule.weights[None, :] * space.det_jacobian[batch][:, None]
        loc = local_fn(batch, rule, tables, wdet)
        vd = space.dofmap.cell_vector_dofs[batch]
        rows.append(np.repeat(vd, 2 * nb, axis=1).ravel())
        cols.append(np.tile(vd, (1, 2 * nb)).ravel())
        vals.append(loc.ravel())
    return _to_csr(rows, cols, vals, space.n_dofs, symmetrize=symmetrize)


def _scalar_to_vector(block):
    """Place a scalar-basis block on both displacement components."""
    b, nb = block.shape[0], block.shape[1]
    loc = np.zeros((b, 2 * nb, 2 * nb))
    loc[:, 0::2, 0::2] = block
    loc[:, 1::2, 1::2] = block
    return loc


def assemble_mass(space, region=None, degree=None):
    """Vector mass matrix over the whole domain or a tagged region."""
    degree = degree or _default_degree(space)
    cells = (
        np.arange(space.mesh.n_cells)
        if region is None
        else space.mesh.region_cells(region)
    )
    if len(cells) == 0:
        raise ValueError(f"region {region!r} contains no cells")

    def local(batch, rule, tables, wdet):
        phi = tables[0][0]
        return _scalar_to_vector(np.einsum("bq,qi,qj->bij", wdet, phi, phi))

    return _assemble_cellwise(space, cells, degree, 0, local)


def assemble_tikhonov(space, alpha, degree=None):
    """alpha * h^(2p) times the full vector mass matrix."""
    return (alpha * space.h ** (2 * space.p)) * assemble_mass(space, degree=degree)


def assemble_grad_stiffness(space, degree=None):
    """Componentwise Laplacian stiffness (dual-variable stabilizer)."""
    degree = degree or _default_degree(space)
    cells = np.arange(space.mesh.n_cells)

    def local(batch, rule, tables, wdet):
        g = _push_forward(space, batch, tables, 1)
        return _scalar_to_vector(np.einsum("bq,bkqi,bkqj->bij", wdet, g, g))

    return _assemble_cellwise(space, cells, degree, 1, local)


def assemble_div_div(space, degree=None):
    """(div u, div v) over the whole domain."""
    degree = degree or _default_degree(space)
    cells = np.arange(space.mesh.n_cells)

    def local(batch, rule, tables, wdet):
        g = _push_forward(space, batch, tables, 1)
        pp = np.einsum("bq,brqj,bsqi->brsij", wdet, g, g)
        loc = np.empty((len(batch), 2 * g.shape[3], 2 * g.shape[3]))
        for c in range(2):
            for d in range(2):
                loc[:, c::2, d::2] = pp[:, d, c]
        return loc

    return _assemble_cellwise(space, cells, degree, 1, local)


def assemble_lame_form(space, material, degree=None):
    """Bilinear form of the elastic operator:

    (2 mu E(u) : E(v) + lambda div u div v - rho u . v) over the domain.
    """
    degree = degree or _default_degree(space)
    cells = np.arange(space.mesh.n_cells)
    sides = material.cell_sides(space.mesh)

    def local(batch, rule, tables, wdet):
        pts = space.physical_points(rule.points, batch)
        vals = material.evaluate(pts, side=_expand_sides(sides, batch), order=0)
        phi = tables[0][0]
        g = _push_forward(space, batch, tables, 1)
        wmu = wdet * vals.mu
        kmu = np.einsum("bq,bkqi,bkqj->bij", wmu, g, g)
        mrho = vals.rho * np.einsum("bq,qi,qj->bij", wdet, phi, phi)
        pmu = np.einsum("bq,brqj,bsqi->brsij", wmu, g, g)
        plam = np.einsum("bq,brqj,bsqi->brsij", wdet * vals.lam, g, g)
        nb = g.shape[3]
        loc = np.empty((len(batch), 2 * nb, 2 * nb))
        for c in range(2):
            for d in range(2):
                blk = pmu[:, c, d] + plam[:, d, c]
                if c == d:
                    blk = blk + kmu - mrho
                loc[:, c::2, d::2] = blk
        return loc

    return _assemble_cellwise(space, cells, degree, 1, local)


# -- strong-residual (least squares) penalty ----------------------------------


def _residual_operator(space, material, batch, rule, tables, sides):
    """L(phi e_d) at quadrature points, shape (B, q, 2, 2nb)."""
    pts = space.physical_points(rule.points, batch)
    vals = material.evaluate(pts, side=_expand_sides(sides, batch), order=1)
    phi = tables[0][0]
    g = _push_forward(space, batch, tables, 1)
    d2 = _push_forward(space, batch, tables, 2)
    lap = d2[:, 0] + d2[:, 2]
    dmu_dot_g = np.einsum("bqk,bkqj->bqj", vals.dmu, g)
    nb = g.shape[3]
    out = np.empty((len(batch), len(rule.weights), 2, 2 * nb))
    for i in range(2):
        for d in range(2):
            term = (
                vals.dmu[..., d, None] * g[:, i]
                + vals.mu[..., None] * d2[:, i + d]
                + vals.dlam[..., i, None] * g[:, d]
                + vals.lam[..., None] * d2[:, i + d]
            )
            if i == d:
                term = term + dmu_dot_g + vals.mu[..., None] * lap
                term = term + vals.rho * phi[None]
            out[:, :, i, d::2] = -term
    return out, pts, vals


def assemble_residual_penalty(space, material, degree=None):
    """h^2 sum_K (L u_h, L v_h)_K with elementwise strong operator."""
    degree = degree or _default_degree(space)
    cells = np.arange(space.mesh.n_cells)
    sides = material.cell_sides(space.mesh)
    h2 = space.h**2

    def local(batch, rule, tables, wdet):
        lop, _, _ = _residual_operator(space, material, batch, rule, tables, sides)
        return h2 * np.einsum("bq,bqix,bqiy->bxy", wdet, lop, lop)

    return _assemble_cellwise(space, cells, degree, 2, local)


def assemble_residual_penalty_rhs(space, material, reference, degree=None):
    """h^2 (f, L v_h) with the manufactured source of `reference`."""
    degree = degree or _default_degree(space)
    rule, tables = _cell_tables(space, degree, 2)
    sides = material.cell_sides(space.mesh)
    h2 = space.h**2
    out = np.zeros(space.n_dofs)
    cells = np.arange(space.mesh.n_cells)
    for s, e in _batches(len(cells), CELL_BATCH):
        batch = cells[s:e]
        wdet = rule.weights[None, :] * space.det_jacobian[batch][:, None]
        lop, pts, _ = _residual_operator(space, material, batch, rule, tables, sides)
        fvals = reference.source(material, pts, side=_expand_sides(sides, batch))
        loc = h2 * np.einsum("bq,bqi,bqix->bx", wdet, fvals, lop)
        np.add.at(out, space.dofmap.cell_vector_dofs[batch].ravel(), loc.ravel())
    return out


def assemble_residual_penalty_cross(space, material, degree=None):
    """Matrix of h^2 (phi_col, L phi_row) pairing a field with the residual."""
    degree = degree or _default_degree(space)
    cells = np.arange(space.mesh.n_cells)
    sides = material.cell_sides(space.mesh)
    h2 = space.h**2

    def local(batch, rule, tables, wdet):
        lop, _, _ = _residual_operator(space, material, batch, rule, tables, sides)
        phi = tables[0][0]
        nb = phi.shape[1]
        loc = np.empty((len(batch), 2 * nb, 2 * nb))
        for d in range(2):
            loc[:, :, d::2] = h2 * np.einsum(
                "bq,bqx,qj->bxj", wdet, lop[:, :, d, :], phi
            )
        return loc

    return _assemble_cellwise(space, cells, degree, 2, local, symmetrize=False)


# -- loads ---------------------------------------------------------------------


def assemble_load(space, fn, region=None, degree=None, sides=None):
    """(fn, v) over the domain or a region; fn(points, sides) -> (..., 2)."""
    degree = degree or _default_degree(space)
    cells = (
        np.arange(space.mesh.n_cells)
        if region is None
        else space.mesh.region_cells(region)
    )
    if len(cells) == 0:
        raise ValueError(f"region {region!r} contains no cells")
    rule, tables = _cell_tables(space, degree, 0)
    phi = tables[0][0]
    out = np.zeros(space.n_dofs)
    for s, e in _batches(len(cells), CELL_BATCH):
        batch = cells[s:e]
        wdet = rule.weights[None, :] * space.det_jacobian[batch][:, None]
        pts = space.physical_points(rule.points, batch)
        fvals = fn(pts, _expand_sides(sides, batch))
        loc = np.einsum("bq,bqc,qi->bci", wdet, fvals, phi)
        vd = space.dofmap.cell_vector_dofs[batch]
        flat = np.empty((len(batch), 2 * phi.shape[1]))
        flat[:, 0::2] = loc[:, 0]
        flat[:, 1::2] = loc[:, 1]
        np.add.at(out, vd.ravel(), flat.ravel())
    return out


def assemble_div_load(space, fn, degree=None, sides=None):
    """(q, div v) over the domain; fn(points, sides) -> scalar values."""
    degree = degree or _default_degree(space)
    cells = np.arange(space.mesh.n_cells)
    rule, tables = _cell_tables(space, degree, 1)
    out = np.zeros(space.n_dofs)
    for s, e in _batches(len(cells), CELL_BATCH):
        batch = cells[s:e]
        wdet = rule.weights[None, :] * space.det_jacobian[batch][:, None]
        pts = space.physical_points(rule.points, batch)
        qvals = fn(pts, _expand_sides(sides, batch))
        g = _push_forward(space, batch, tables, 1)
        loc = np.einsum("bq,bq,bcqi->bci", wdet, qvals, g)
        nb = g.shape[3]
        flat = np.empty((len(batch), 2 * nb))
        flat[:, 0::2] = loc[:, 0]
        flat[:, 1::2] = loc[:, 1]
        np.add.at(out, space.dofmap.cell_vector_dofs[batch].ravel(), flat.ravel())
    return out


# -- facet jump penalties --------------------------------------------------------


def _coeff_partial(vals, which, order, ycount):
    arr = {
        ("mu", 0): vals.mu,
        ("mu", 1): vals.dmu,
        ("mu", 2): vals.d2mu,
        ("lam", 0): vals.lam,
        ("lam", 1): vals.dlam,
        ("lam", 2): vals.d2lam,
    }[(which, order)]
    return arr if order == 0 else arr[..., ycount]


def _traction_derivatives(space, material, cells, normals, phys, m):
    """All order-m partials of (grad^m sigma(phi e_d)) . n on one facet side.

    Returns (F, q, 2, m+1, 2nb): output component i, multi-index (y-count),
    local trial vector dof.  `normals` are the side's outward normals.
    """
    f, q = phys.shape[:2]
    ref = space.reference_points(phys, cells)
    flat = ref.reshape(-1, 2)
    tables = {}
    for o in range(1, m + 2):
        tab = space.element.eval(flat, o)
        tables[o] = tab.reshape(o + 1, f, q, -1)
    nb = tables[1].shape[-1]

    phys_d = {}
    amat = space.grad_map[cells]
    tmat_fns = {1: lambda a: a, 2: _transform2, 3: _transform3}
    for o in range(1, m + 2):
        phys_d[o] = np.einsum("fst,tfqb->fsqb", tmat_fns[o](amat), tables[o])

    side_vals = material.side(space.mesh.cell_centroids()[cells])
    vals = material.evaluate(phys, side=side_vals[:, None], order=m)

    nx = normals[:, 0][:, None, None]
    ny = normals[:, 1][:, None, None]
    out = np.zeros((f, q, 2, m + 1, 2 * nb))
    for b in range(m + 1):  # multi-index (m - b, b)
        a = m - b
        for bp in range(b + 1):
            for ap in range(a + 1):
                w_bin = math.comb(a, ap) * math.comb(b, bp)
                oc = (a - ap) + (b - bp)
                op = ap + bp
                mu_fac = w_bin * _coeff_partial(vals, "mu", oc, b - bp)
                lam_fac = w_bin * _coeff_partial(vals, "lam", oc, b - bp)
                gx = phys_d[op + 1][:, bp]
                gy = phys_d[op + 1][:, bp + 1]
                gn = gx * nx + gy * ny
                gvec = (gx, gy)
                for i in range(2):
                    ni = nx if i == 0 else ny
                    for d in range(2):
                        nd = nx if d == 0 else ny
                        term = mu_fac[..., None] * gvec[i] * nd + lam_fac[
                            ..., None
                        ] * ni * gvec[d]
                        if i == d:
                            term = term + mu_fac[..., None] * gn
                        out[:, :, i, b, d::2] += term
    return out


def assemble_stress_jump(space, material, order_j, degree=None):
    """Facet penalty J_j: h^(2j-1) sum_F int_F [grad^(j-1) sigma . n]^2.

    The two cell-side traces are contracted with each side's outward normal
    and the product of the jumps is the full Frobenius pairing over the
    output component and all derivative indices.
    """
    p = space.p
    if not 1 <= order_j <= p:
        raise ValueError(f"jump order {order_j} outside 1..{p}")
    if order_j >= 2 and not material.is_smooth:
        raise ValueError("jump orders >= 2 require globally smooth coefficients")
    m = order_j - 1
    degree = degree or _default_degree(space)
    mesh = space.mesh
    nif = len(mesh.interior_facets)
    if nif == 0:
        return sp.csr_matrix((space.n_dofs, space.n_dofs))

    rule = segment_quadrature(degree)
    t = rule.points
    wq = rule.weights
    frobenius = np.array([math.comb(m, b) for b in range(m + 1)], dtype=float)
    hfac = space.h ** (2 * order_j - 1)
    nb = space.element.n_basis

    rows, cols, vals = [], [], []
    for s, e in _batches(nif, FACET_BATCH):
        fv = mesh.interior_facets[s:e]
        fc = mesh.interior_facet_cells[s:e]
        nrm = mesh.interior_facet_normals[s:e]
        va = mesh.vertices[fv[:, 0]]
        vb = mesh.vertices[fv[:, 1]]
        length = np.linalg.norm(vb - va, axis=1)
        phys = va[:, None, :] + t[None, :, None] * (vb - va)[:, None, :]

        td0 = _traction_derivatives(space, material, fc[:, 0], nrm, phys, m)
        td1 = _traction_derivatives(space, material, fc[:, 1], -nrm, phys, m)
        jump = np.concatenate([td0, td1], axis=-1)
        wl = wq[None, :] * length[:, None]
        loc = hfac * np.einsum("fq,k,fqikx,fqiky->fxy", wl, frobenius, jump, jump)

        vd = np.concatenate(
            [
                space.dofmap.cell_vector_dofs[fc[:, 0]],
                space.dofmap.cell_vector_dofs[fc[:, 1]],
            ],
            axis=1,
        )
        rows.append(np.repeat(vd, 4 * nb, axis=1).ravel())
        cols.append(np.tile(vd, (1, 4 * nb)).ravel())
        vals.append(loc.ravel())
    return _to_csr(rows, cols, vals, space.n_dofs, symmetrize=True)
