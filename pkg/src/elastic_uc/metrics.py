"""Error norms on tagged regions and empirical-order-of-convergence tables."""

from __future__ import annotations

import numpy as np

from .assemble import _batches, _cell_tables, _expand_sides, _push_forward, CELL_BATCH


def _field_at_quad(space, coeffs, batch, phi):
    """FE displacement at quadrature points, shape (B, q, 2)."""
    vd = space.dofmap.cell_vector_dofs[batch]
    c = coeffs[vd]
    ux = np.einsum("qi,bi->bq", phi, c[:, 0::2])
    uy = np.einsum("qi,bi->bq", phi, c[:, 1::2])
    return np.stack([ux, uy], axis=-1)


def _grad_at_quad(space, coeffs, batch, gphys):
    """FE displacement gradient d_j u_i at quadrature points, (B, q, 2, 2)."""
    vd = space.dofmap.cell_vector_dofs[batch]
    c = coeffs[vd]
    out = np.empty((len(batch), gphys.shape[2], 2, 2))
    for i, sl in enumerate((slice(0, None, 2), slice(1, None, 2))):
        for j in range(2):
            out[:, :, i, j] = np.einsum("bqk,bk->bq", gphys[:, j], c[:, sl])
    return out


def region_l2_error(space, coeffs, reference, region, degree=None):
    """(absolute, relative) L2 error of the FE field against the reference."""
    degree = degree or (2 * space.p + 2)
    cells = space.mesh.region_cells(region)
    if len(cells) == 0:
        raise ValueError(f"region {region!r} contains no cells")
    rule, tables = _cell_tables(space, degree, 0)
    phi = tables[0][0]
    sides = reference.cell_sides(space.mesh)
    err2 = 0.0
    norm2 = 0.0
    for s, e in _batches(len(cells), CELL_BATCH):
        batch = cells[s:e]
        wdet = rule.weights[None, :] * space.det_jacobian[batch][:, None]
        pts = space.physical_points(rule.points, batch)
        uref = reference.displacement(pts, side=_expand_sides(sides, batch))
        uh = _field_at_quad(space, coeffs, batch, phi)
        err2 += float(np.einsum("bq,bqc->", wdet, (uh - uref) ** 2))
        norm2 += float(np.einsum("bq,bqc->", wdet, uref**2))
    absolute = np.sqrt(err2)
    relative = absolute / np.sqrt(norm2) if norm2 > 0 else np.inf
    return absolute, relative


def region_h1_semi_error(space, coeffs, reference, region, degree=None):
    """(absolute, relative) L2 error of the displacement gradient."""
    degree = degree or (2 * space.p + 2)
    cells = space.mesh.region_cells(region)
    if len(cells) == 0:
        raise ValueError(f"region {region!r} contains no cells")
    rule, tables = _cell_tables(space, degree, 1)
    sides = reference.cell_sides(space.mesh)
    err2 = 0.0
    norm2 = 0.0
    for s, e in _batches(len(cells), CELL_BATCH):
        batch = cells[s:e]
        wdet = rule.weights[None, :] * space.det_jacobian[batch][:, None]
        pts = space.physical_points(rule.points, batch)
        gref = reference.gradient(pts, side=_expand_sides(sides, batch))
        gphys = _push_forward(space, batch, tables, 1)
        gh = _grad_at_quad(space, coeffs, batch, gphys)
        err2 += float(np.einsum("bq,bqij->", wdet, (gh - gref) ** 2))
        norm2 += float(np.einsum("bq,bqij->", wdet, gref**2))
    absolute = np.sqrt(err2)
    relative = absolute / np.sqrt(norm2) if norm2 > 0 else np.inf
    return absolute, relative


def weighted_error(space, coeffs, reference, region, k, degree=None):
    """k * ||u - u_h||_region + ||grad u - grad u_h||_region."""
    l2, _ = region_l2_error(space, coeffs, reference, region, degree)
    h1, _ = region_h1_semi_error(space, coeffs, reference, region, degree)
    return k * l2 + h1


def eoc(errors):
    """log2 ratios between consecutive mesh halvings; NaN where undefined."""
    errors = np.asarray(errors, dtype=float)
    out = np.full(len(errors), np.nan)
    for i in range(1, len(errors)):
        if errors[i] > 0 and errors[i - 1] > 0:
            out[i] = np.log2(errors[i - 1] / errors[i])
    return out


def fit_loglog_slope(x, y):
    """Least-squares slope of log(y) against log(x)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


class ConvergenceTable:
    """Per-level records with EOC columns computed on demand.

    Columns: level, h, ndofs, then per region absolute error, relative
    error, and EOC of the relative error; extra columns are appended as
    given.
    """

    def __init__(self, regions, extra_columns=()):
        self.regions = list(regions)
        self.extra_columns = list(extra_columns)
        self.rows = []

    def add_row(self, level, h, ndofs, errors, extra=None):
        """`errors` maps region -> (absolute, relative)."""
        self.rows.append(
            {
                "level": level,
                "h": h,
                "ndofs": ndofs,
                "errors": {r: errors[r] for r in self.regions},
                "extra": dict(extra or {}),
            }
        )

    def relative(self, region):
        return np.array([r["errors"][region][1] for r in self.rows])

    def absolute(self, region):
        return np.array([r["errors"][region][0] for r in self.rows])

    def eoc(self, region):
        return eoc(self.relative(region))

    def header(self):
        cols = ["level", "h", "ndofs"]
        for r in self.regions:
            cols += [f"abs_{r}", f"rel_{r}", f"eoc_{r}"]
        cols += self.extra_columns
        return cols

    def to_csv(self):
        lines = [",".join(self.header())]
        eocs = {r: self.eoc(r) for r in self.regions}
        for i, row in enumerate(self.rows):
            cells = [str(row["level"]), f"{row['h']:.12e}", str(row["ndofs"])]
            for r in self.regions:
                a, rel = row["errors"][r]
                cells += [f"{a:.12e}", f"{rel:.12e}"]
                cells.append("" if np.isnan(eocs[r][i]) else f"{eocs[r][i]:.6f}")
            for c in self.extra_columns:
                v = row["extra"].get(c)
                cells.append("" if v is None else f"{v:.12e}")
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def write_csv(self, path):
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(self.to_csv())
