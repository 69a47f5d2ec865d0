import filecmp
import os

import numpy as np
import pytest

import elastic_uc as uc
from elastic_uc import experiments
from elastic_uc.config import ExperimentConfig
from elastic_uc.solutions import jump_coefficients


def cfg(**kw):
    base = dict(experiment="convergence", orders=(1,), levels=2, k=1.0)
    base.update(kw)
    return ExperimentConfig(**base).validate()


def read_bytes(path):
    with open(path, "rb") as fh:
        return fh.read()


def test_degenerate_single_value_sweep(tmp_path):
    config = cfg(
        experiment="sweep",
        sweep_values=(1e-5,),
        sweep_level=0,
        orders=(1,),
    )
    results = experiments.run_sweep(config, tmp_path)
    assert len(results[1]) == 1
    csv = (tmp_path / "sweep_gamma1_p1.csv").read_text().strip().split("\n")
    assert csv[0] == "gamma1,rel_error_B,condition"
    assert len(csv) == 2


def test_convergence_run_outputs_and_determinism(tmp_path):
    config = cfg(theta=(0,), noise_amplitude=1.0, seed=11, levels=3)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    experiments.run_convergence(config, out1)
    experiments.run_convergence(config, out2)
    name = "convergence_p1_theta0.csv"
    assert read_bytes(out1 / name) == read_bytes(out2 / name)
    table = (out1 / name).read_text().strip().split("\n")
    assert len(table) == 4  # header + 3 levels


def test_convergence_different_seed_changes_output(tmp_path):
    a = experiments.run_convergence(cfg(seed=1, noise_amplitude=1.0), tmp_path / "a")
    b = experiments.run_convergence(cfg(seed=2, noise_amplitude=1.0), tmp_path / "b")
    ra = a[(1, 0)].relative("B")
    rb = b[(1, 0)].relative("B")
    assert not np.allclose(ra, rb)


def test_split_run_produces_both_variants(tmp_path):
    config = cfg(
        experiment="split", geometry="split", variant="constant",
        mu=1.0, lam=1.25, orders=(1,), levels=3,
    )
    tables = experiments.run_split(config, tmp_path)
    assert (1, "plain") in tables and (1, "div") in tables
    assert (tmp_path / "split_plain_p1.csv").exists()
    assert (tmp_path / "split_div_p1.csv").exists()
    # knowing the divergence helps most outside the convex hull of the data:
    # the B+ error drops at every level
    plain = tables[(1, "plain")].absolute("B_plus")
    div = tables[(1, "div")].absolute("B_plus")
    assert (div < plain).all()


def test_jump_gate_passes_for_valid_coefficients():
    ref = experiments._check_interface_gate(2.0, 1.0, 0.6, 4.0, 1.25)
    assert ref.variant == "plane_jump"


def test_jump_gate_aborts_on_violation(monkeypatch):
    def bad_verify(solution, lam, n_samples=100):
        return 0.5, 0.0

    monkeypatch.setattr(experiments, "verify_interface_conditions", bad_verify)
    with pytest.raises(experiments.ExperimentGateError, match="interface"):
        experiments._check_interface_gate(2.0, 1.0, 0.6, 4.0, 1.25)


def test_jump_requires_interface_on_region_split(tmp_path):
    config = cfg(experiment="jump", geometry="split", eta=0.5, xi=0.6)
    with pytest.raises(ValueError, match="interface"):
        experiments.run_jump(config, tmp_path)


def test_condition_run_fits_slope(tmp_path):
    config = cfg(experiment="condition", orders=(1,), levels=3, k=6.0)
    results, slopes = experiments.run_condition(config, tmp_path)
    assert len(results[1]) == 3
    assert slopes[0][0] == 1 and slopes[0][1] < -2.0
    assert (tmp_path / "condition_slopes.csv").exists()


def test_gnuplot_scripts_use_relative_paths(tmp_path):
    config = cfg(levels=2, noise_amplitude=0.0)
    experiments.run_convergence(config, tmp_path)
    script = (tmp_path / "plot_convergence.gp").read_text()
    assert "datafile separator" in script
    assert str(tmp_path) not in script
    for token in script.split("'"):
        assert not os.path.isabs(token) or not token.endswith(".csv")


def test_dof_budget_caps_levels(tmp_path):
    config = cfg(levels=4, max_dofs=800, noise_amplitude=0.0)
    tables = experiments.run_convergence(config, tmp_path)
    assert len(tables[(1, 0)].rows) < 4
