"""Stabilized finite elements for unique continuation of time-harmonic
elastic waves on the unit square, with an experiment harness."""

from .elements import (
    QuadratureRule,
    ReferenceElement,
    eval_basis,
    reference_element,
    segment_quadrature,
    triangle_quadrature,
)
from .mesh import Mesh, Rectangle, RegionSpec, build_fitted_mesh, refine_uniform, tag_regions
from .materials import MaterialModel, MaterialValues
from .solutions import (
    ReferenceSolution,
    jump_coefficients,
    lame_apply,
    stress,
    verify_interface_conditions,
)
from .spaces import DofMap, FunctionSpace
from .system import (
    ConditionEstimate,
    SaddleSystem,
    StabilizationParams,
    build_saddle_system,
    estimate_spectral_condition,
    inf_sup_identity,
)
from .noise import NoiseSpec, Perturbation, make_perturbation
from .metrics import (
    ConvergenceTable,
    eoc,
    fit_loglog_slope,
    region_h1_semi_error,
    region_l2_error,
    weighted_error,
)
from .geometry import Geometry, initial_mesh, make_geometry, mesh_at_level
from .config import ExperimentConfig, load_config, override_config
from .experiments import ExperimentGateError, RUNNERS

__version__ = "0.1.0"
