"""Experiment configuration: plain-text key=value sections, CLI overridable."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, replace

EXPERIMENTS = (
    "sweep",
    "convergence",
    "pollution",
    "split",
    "jump",
    "inclusion",
    "condition",
)


def _parse_floats(text):
    return tuple(float(v) for v in text.replace(",", " ").split())


def _parse_ints(text):
    return tuple(int(v) for v in text.replace(",", " ").split())


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    geometry: str = "convex"
    xi: float = 0.6
    orders: tuple = (1, 2, 3)
    levels: int = 4
    k: float = 1.0
    initial_spacing: float = 0.25
    max_dofs: int = 500_000

    # material
    variant: str = "trigonometric"
    mu: float = 1.0
    lam: float = 1.25
    mu_plus: float = 2.0
    mu_minus: float = 1.0
    eta: float = 0.6
    mu_inner: float = 1.0
    mu_outer: float = 1.0
    rho_sign: float = -1.0

    # stabilization ("auto" resolves to the tuned defaults per order)
    gamma1: float | None = None
    gamma_gls: float | None = None
    alpha: float = 1e-3
    beta2: float = 0.0
    gamma2: float | None = None

    # noise
    theta: tuple = (0,)
    noise_amplitude: float = 1.0
    seed: int = 0

    # flags
    well_posed: bool = False
    divergence_augmentation: bool = False

    # sweep
    sweep_parameter: str = "gamma1"
    sweep_values: tuple = ()
    sweep_level: int = 2

    # pollution
    pollution_base_k: float = 1.0
    pollution_beta2: float = 1e-4

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.levels < 2:
            raise ValueError("need at least 2 refinement levels for EOC")
        if any(p not in (1, 2, 3) for p in self.orders):
            raise ValueError("polynomial orders must be in {1, 2, 3}")
        for th in self.theta:
            if th < 0:
                raise ValueError("theta must be non-negative")
        if self.experiment == "sweep" and not self.sweep_values:
            raise ValueError("sweep experiment needs sweep_values")
        return self


_SECTION_FIELDS = {
    "experiment": {
        "name": ("experiment", str),
        "geometry": ("geometry", str),
        "xi": ("xi", float),
        "orders": ("orders", _parse_ints),
        "levels": ("levels", int),
        "k": ("k", float),
        "initial_spacing": ("initial_spacing", float),
        "max_dofs": ("max_dofs", int),
    },
    "material": {
        "variant": ("variant", str),
        "mu": ("mu", float),
        "lam": ("lam", float),
        "lambda": ("lam", float),
        "mu_plus": ("mu_plus", float),
        "mu_minus": ("mu_minus", float),
        "eta": ("eta", float),
        "mu_inner": ("mu_inner", float),
        "mu_outer": ("mu_outer", float),
        "rho_sign": ("rho_sign", float),
    },
    "stabilization": {
        "gamma1": ("gamma1", float),
        "gamma_gls": ("gamma_gls", float),
        "alpha": ("alpha", float),
        "beta2": ("beta2", float),
        "gamma2": ("gamma2", float),
    },
    "noise": {
        "theta": ("theta", _parse_ints),
        "amplitude": ("noise_amplitude", float),
        "seed": ("seed", int),
    },
    "flags": {
        "well_posed": ("well_posed", None),
        "divergence_augmentation": ("divergence_augmentation", None),
    },
    "sweep": {
        "parameter": ("sweep_parameter", str),
        "values": ("sweep_values", _parse_floats),
        "level": ("sweep_level", int),
    },
    "pollution": {
        "base_k": ("pollution_base_k", float),
        "beta2": ("pollution_beta2", float),
    },
}


def _parse_bool(text):
    val = text.strip().lower()
    if val in ("1", "true", "yes", "on"):
        return True
    if val in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def load_config(path, overrides=()):
    """Read an INI-style config file; `overrides` are 'section.key=value'."""
    parser = configparser.ConfigParser()
    with open(path, encoding="utf-8") as fh:
        parser.read_file(fh)
    kwargs = {}
    for section in parser.sections():
        if section not in _SECTION_FIELDS:
            raise ValueError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            kwargs.update(_convert(section, key, raw))
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ValueError(f"override must look like section.key=value: {item!r}")
        target, raw = item.split("=", 1)
        section, key = target.split(".", 1)
        kwargs.update(_convert(section, key, raw))
    if "experiment" not in kwargs:
        raise ValueError("config must set [experiment] name")
    return ExperimentConfig(**kwargs).validate()


def _convert(section, key, raw):
    fields = _SECTION_FIELDS.get(section)
    if fields is None or key not in fields:
        raise ValueError(f"unknown config entry [{section}] {key}")
    name, conv = fields[key]
    value = _parse_bool(raw) if conv is None else conv(raw)
    return {name: value}


def override_config(config, **kwargs):
    return replace(config, **kwargs).validate()
