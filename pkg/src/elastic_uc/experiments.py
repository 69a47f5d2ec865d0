"""Experiment drivers: parameter sweeps, convergence, pollution, geometry
and discontinuous-coefficient studies.  Each driver is a pure function of
its configuration; outputs are CSV tables plus a gnuplot script with
relative paths only.
"""

from __future__ import annotations

import itertools
import os

import numpy as np

from .assemble import assemble_mass
from .geometry import make_geometry, mesh_at_level
from .materials import MaterialModel
from .metrics import (
    ConvergenceTable,
    fit_loglog_slope,
    region_l2_error,
    weighted_error,
)
from .noise import NoiseSpec, make_perturbation
from .solutions import ReferenceSolution, verify_interface_conditions
from .spaces import FunctionSpace
from .system import StabilizationParams, build_saddle_system

INTERFACE_GATE_TOL = 1e-8


class ExperimentGateError(RuntimeError):
    """An invariant gate failed before or during an experiment."""


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{value:.12e}"


def _write_csv(path, header, rows):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_gnuplot(path, ylabel, xlabel, plots, logscale="xy"):
    lines = [
        "set datafile separator ','",
        f"set logscale {logscale}" if logscale else "unset logscale",
        f"set xlabel '{xlabel}'",
        f"set ylabel '{ylabel}'",
        "set key outside",
        "plot \\",
    ]
    parts = [
        f"  '{fname}' using {cols} with linespoints title '{title}'"
        for fname, cols, title in plots
    ]
    lines.append(", \\\n".join(parts))
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _material(config, k):
    if config.variant == "constant":
        return MaterialModel.constant(config.mu, config.lam, k, config.rho_sign)
    if config.variant == "trigonometric":
        return MaterialModel.trigonometric(k, config.rho_sign)
    if config.variant == "plane_jump":
        return MaterialModel.plane_jump(
            config.mu_plus, config.mu_minus, config.eta, k, config.lam, config.rho_sign
        )
    if config.variant == "inclusion":
        from .geometry import inclusion_geometry

        rect = inclusion_geometry().regions["B"].rectangles[0]
        return MaterialModel.inclusion(
            config.mu_inner, config.mu_outer, rect, k, config.lam, config.rho_sign
        )
    raise ValueError(f"unknown material variant {config.variant!r}")


def _params(config, p, beta2=0.0):
    return StabilizationParams.defaults(
        p,
        gamma1=config.gamma1,
        gamma_gls=config.gamma_gls,
        alpha=config.alpha,
        beta2=beta2,
    )


def _space_size(space, well_posed):
    n_primal = space.n_dofs - (len(space.dofmap.boundary_vector_dofs) if well_posed else 0)
    return n_primal + len(space.dofmap.interior_vector_dofs)


def _solve_level(
    config,
    geometry,
    level,
    p,
    material,
    reference,
    params,
    well_posed=False,
    noise_spec=None,
    divergence=False,
):
    mesh = mesh_at_level(geometry, level, config.initial_spacing)
    space = FunctionSpace(mesh, p)
    if _space_size(space, well_posed) > config.max_dofs:
        return None
    perturbation = None
    data = "unperturbed"
    if noise_spec is not None and noise_spec.amplitude > 0:
        m_omega = assemble_mass(space, region="omega")
        m_full = assemble_mass(space)
        perturbation = make_perturbation(space, noise_spec, m_omega, m_full)
        data = "perturbed"
    system = build_saddle_system(
        space,
        material,
        params,
        reference,
        problem_kind="well-posed-dirichlet" if well_posed else "ill-posed",
        data=data,
        perturbation=perturbation,
        divergence_data=divergence,
    )
    u, z = system.solve()
    return space, system, u, z


def _error_row(space, u, reference, regions):
    return {r: region_l2_error(space, u, reference, r) for r in regions}


# -- convergence under data perturbations -------------------------------------


def run_convergence(config, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    geometry = make_geometry(config.geometry, config.xi)
    material = _material(config, config.k)
    reference = ReferenceSolution.oscillatory(config.k)
    tables = {}
    plots = []
    for p in config.orders:
        for th in config.theta:
            table = ConvergenceTable(["B"])
            params = _params(config, p)
            spec = NoiseSpec(th, config.noise_amplitude, config.seed)
            for level in range(config.levels):
                solved = _solve_level(
                    config, geometry, level, p, material, reference, params,
                    well_posed=config.well_posed, noise_spec=spec,
                )
                if solved is None:
                    break
                space, system, u, _ = solved
                table.add_row(
                    level, space.h, system.n_unknowns,
                    _error_row(space, u, reference, ["B"]),
                )
            tables[(p, th)] = table
            name = f"convergence_p{p}_theta{th}.csv"
            table.write_csv(os.path.join(out_dir, name))
            plots.append((name, "2:5", f"p={p}, theta={th}"))
    _write_gnuplot(
        os.path.join(out_dir, "plot_convergence.gp"),
        "relative L2 error in B", "h", plots,
    )
    return tables


# -- split geometry with divergence augmentation -------------------------------


def run_split(config, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    geometry = make_geometry("split", config.xi)
    material = _material(config, config.k)
    reference = ReferenceSolution.oscillatory(config.k)
    regions = ["B_minus", "B_plus"]
    tables = {}
    plots = []
    for divergence in (False, True):
        tag = "div" if divergence else "plain"
        for p in config.orders:
            table = ConvergenceTable(regions)
            params = _params(config, p)
            for level in range(config.levels):
                solved = _solve_level(
                    config, geometry, level, p, material, reference, params,
                    divergence=divergence,
                )
                if solved is None:
                    break
                space, system, u, _ = solved
                table.add_row(
                    level, space.h, system.n_unknowns,
                    _error_row(space, u, reference, regions),
                )
            tables[(p, tag)] = table
            name = f"split_{tag}_p{p}.csv"
            table.write_csv(os.path.join(out_dir, name))
            plots.append((name, "2:5", f"B- p={p} {tag}"))
            plots.append((name, "2:8", f"B+ p={p} {tag}"))
    _write_gnuplot(
        os.path.join(out_dir, "plot_split.gp"),
        "relative L2 error", "h", plots,
    )
    return tables


# -- jumping shear modulus -------------------------------------------------------


def _check_interface_gate(mu_plus, mu_minus, eta, k, lam):
    reference = ReferenceSolution.plane_jump(mu_plus, mu_minus, eta, k)
    max_u, max_t = verify_interface_conditions(reference, lam, 100)
    if max(max_u, max_t) > INTERFACE_GATE_TOL:
        raise ExperimentGateError(
            f"interface conditions violated: |[u]|={max_u:.3e}, "
            f"|[sigma n]|={max_t:.3e} exceed {INTERFACE_GATE_TOL:.0e}"
        )
    return reference


def run_jump(config, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    if abs(config.eta - config.xi) > 1e-14:
        raise ValueError("jump experiment expects the interface at the region split")
    geometry = make_geometry("split", config.xi)
    regions = ["B_minus", "B_plus"]
    tables = {}
    plots = []
    pairs = [(config.mu_plus, config.mu_minus), (config.mu_minus, config.mu_plus)]
    for mu_p, mu_m in pairs:
        reference = _check_interface_gate(mu_p, mu_m, config.eta, config.k, config.lam)
        material = MaterialModel.plane_jump(
            mu_p, mu_m, config.eta, config.k, config.lam, config.rho_sign
        )
        for p in config.orders:
            table = ConvergenceTable(regions)
            params = _params(config, p)
            for level in range(config.levels):
                solved = _solve_level(
                    config, geometry, level, p, material, reference, params
                )
                if solved is None:
                    break
                space, system, u, _ = solved
                table.add_row(
                    level, space.h, system.n_unknowns,
                    _error_row(space, u, reference, regions),
                )
            tables[(mu_p, mu_m, p)] = table
            name = f"jump_mup{mu_p:g}_mum{mu_m:g}_p{p}.csv"
            table.write_csv(os.path.join(out_dir, name))
            plots.append((name, "2:5", f"B- mu+={mu_p:g} mu-={mu_m:g} p={p}"))
            plots.append((name, "2:8", f"B+ mu+={mu_p:g} mu-={mu_m:g} p={p}"))
    _write_gnuplot(
        os.path.join(out_dir, "plot_jump.gp"), "relative L2 error", "h", plots
    )
    return tables


# -- inclusion with bottom-only data ---------------------------------------------


def run_inclusion(config, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    geometry = make_geometry("inclusion")
    rect = geometry.regions["B"].rectangles[0]
    regions = ["B_minus", "B_plus"]
    tables = {}
    plots = []
    mu_values = (1.0, 2.0)
    reference = ReferenceSolution.inclusion(rect, config.k)
    for mu_i, mu_e in itertools.product(mu_values, mu_values):
        material = MaterialModel.inclusion(
            mu_i, mu_e, rect, config.k, config.lam, config.rho_sign
        )
        for p in config.orders:
            table = ConvergenceTable(regions)
            params = _params(config, p)
            for level in range(config.levels):
                solved = _solve_level(
                    config, geometry, level, p, material, reference, params
                )
                if solved is None:
                    break
                space, system, u, _ = solved
                table.add_row(
                    level, space.h, system.n_unknowns,
                    _error_row(space, u, reference, regions),
                )
            tables[(mu_i, mu_e, p)] = table
            name = f"inclusion_mui{mu_i:g}_mue{mu_e:g}_p{p}.csv"
            table.write_csv(os.path.join(out_dir, name))
            plots.append((name, "2:5", f"B- mui={mu_i:g} mue={mu_e:g} p={p}"))
            plots.append((name, "2:8", f"B+ mui={mu_i:g} mue={mu_e:g} p={p}"))
    _write_gnuplot(
        os.path.join(out_dir, "plot_inclusion.gp"), "relative L2 error", "h", plots
    )
    return tables


# -- pollution at constant kh -----------------------------------------------------


def run_pollution(config, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    geometry = make_geometry(config.geometry, config.xi)
    results = {}
    slope_rows = []
    plots = []
    for p in config.orders:
        beta_options = (0.0,) if p < 2 else (0.0, config.pollution_beta2)
        for well_posed in (False, True):
            kind = "wp" if well_posed else "ill"
            for beta2 in beta_options:
                rows = []
                for level in range(config.levels):
                    k = config.pollution_base_k * 2**level
                    material = _material(config, k)
                    reference = ReferenceSolution.oscillatory(k)
                    params = _params(config, p, beta2=beta2)
                    solved = _solve_level(
                        config, geometry, level, p, material, reference, params,
                        well_posed=well_posed,
                    )
                    if solved is None:
                        break
                    space, system, u, _ = solved
                    werr = weighted_error(space, u, reference, "B", k)
                    rows.append((level, k, space.h, system.n_unknowns, werr))
                key = (p, kind, beta2)
                results[key] = rows
                name = f"pollution_p{p}_{kind}_beta{beta2:g}.csv"
                _write_csv(
                    os.path.join(out_dir, name),
                    ["level", "k", "h", "ndofs", "weighted_error"],
                    rows,
                )
                plots.append((name, "2:5", f"p={p} {kind} beta2={beta2:g}"))
                ks = [r[1] for r in rows]
                ws = [r[4] for r in rows]
                slope = fit_loglog_slope(ks, ws) if len(rows) >= 2 else None
                slope_rows.append((p, kind, beta2, slope))
    _write_csv(
        os.path.join(out_dir, "pollution_slopes.csv"),
        ["p", "kind", "beta2", "slope"],
        slope_rows,
    )
    _write_gnuplot(
        os.path.join(out_dir, "plot_pollution.gp"),
        "weighted error k*L2 + H1", "k", plots,
    )
    return results, slope_rows


# -- stabilization parameter sweeps ------------------------------------------------


def _sweep_params(config, p, value):
    auto = 1e-5 / p**3.5
    if config.sweep_parameter == "gamma1":
        return StabilizationParams(
            (value,) + (0.0,) * (p - 1), 1e-12, config.alpha, (0.0,) * p
        )
    if config.sweep_parameter == "gamma_gls":
        return StabilizationParams(
            (auto,) + (0.0,) * (p - 1), value, config.alpha, (0.0,) * p
        )
    if config.sweep_parameter == "alpha":
        return StabilizationParams(
            (auto,) + (0.0,) * (p - 1), auto, value, (0.0,) * p
        )
    raise ValueError(f"unknown sweep parameter {config.sweep_parameter!r}")


def run_sweep(config, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    geometry = make_geometry(config.geometry, config.xi)
    material = _material(config, config.k)
    reference = ReferenceSolution.oscillatory(config.k)
    results = {}
    plots = []
    for p in config.orders:
        rows = []
        for value in config.sweep_values:
            params = _sweep_params(config, p, value)
            solved = _solve_level(
                config, geometry, config.sweep_level, p, material, reference, params
            )
            if solved is None:
                raise ValueError("sweep level exceeds the dof budget")
            space, system, u, _ = solved
            _, rel = region_l2_error(space, u, reference, "B")
            cond = system.condition_estimate(seed=config.seed)
            rows.append((value, rel, cond.kappa))
        results[p] = rows
        name = f"sweep_{config.sweep_parameter}_p{p}.csv"
        _write_csv(
            os.path.join(out_dir, name),
            [config.sweep_parameter, "rel_error_B", "condition"],
            rows,
        )
        plots.append((name, "1:2", f"error p={p}"))
    _write_gnuplot(
        os.path.join(out_dir, "plot_sweep.gp"),
        "relative L2 error in B", config.sweep_parameter, plots,
    )
    return results


# -- condition number scaling --------------------------------------------------------


def run_condition(config, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    geometry = make_geometry(config.geometry, config.xi)
    material = _material(config, config.k)
    reference = ReferenceSolution.oscillatory(config.k)
    results = {}
    slope_rows = []
    plots = []
    for p in config.orders:
        params = _params(config, p)
        rows = []
        for level in range(config.levels):
            solved = _solve_level(
                config, geometry, level, p, material, reference, params
            )
            if solved is None:
                break
            space, system, _, _ = solved
            cond = system.condition_estimate(seed=config.seed)
            rows.append((level, space.h, system.n_unknowns, cond.kappa))
        results[p] = rows
        name = f"condition_p{p}.csv"
        _write_csv(
            os.path.join(out_dir, name), ["level", "h", "ndofs", "kappa"], rows
        )
        plots.append((name, "2:4", f"p={p}"))
        if len(rows) >= 2:
            slope = fit_loglog_slope([r[1] for r in rows], [r[3] for r in rows])
        else:
            slope = None
        slope_rows.append((p, slope))
    _write_csv(os.path.join(out_dir, "condition_slopes.csv"), ["p", "slope"], slope_rows)
    _write_gnuplot(
        os.path.join(out_dir, "plot_condition.gp"), "condition number", "h", plots
    )
    return results, slope_rows


RUNNERS = {
    "sweep": run_sweep,
    "convergence": run_convergence,
    "pollution": run_pollution,
    "split": run_split,
    "jump": run_jump,
    "inclusion": run_inclusion,
    "condition": run_condition,
}
