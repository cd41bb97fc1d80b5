"""Detect k-nonseparable multipartite states from a few matrix elements.

Submodules: :mod:`.tensor` (product-space linear algebra and state files),
:mod:`.states` (families and random k-separable states), :mod:`.probes`,
:mod:`.criteria`, :mod:`.scan` and :mod:`.measurement`.
"""
from .criteria import EPS, CriterionReport, PairReport, classify, uniform_level_k_report, level_k_report, pairwise_reports, two_copy_oracle
from .measurement import estimated_report, settings_plan, simulate_shots, verify_identities
from .probes import (
    Probe,
    catalog,
    expand,
    probe_45,
    probe_anticomputational,
    probe_computational,
    probe_custom,
    probe_phase_flip,
    random_probe,
)
from .scan import analytic_w_threshold, bisect_threshold, family_curve, grid_scan
from .states import (
    FamilyPoint,
    anti_w,
    biseparable_triple,
    family_state,
    ghz,
    random_density,
    random_k_separable,
    w_state,
)
from .tensor import DensityOperator, SystemDims, ValidationError, load_state, save_state

__version__ = "0.1.0"

__all__ = [
    "EPS",
    "CriterionReport",
    "PairReport",
    "classify",
    "uniform_level_k_report",
    "level_k_report",
    "pairwise_reports",
    "two_copy_oracle",
    "estimated_report",
    "settings_plan",
    "simulate_shots",
    "verify_identities",
    "Probe",
    "catalog",
    "expand",
    "probe_45",
    "probe_anticomputational",
    "probe_computational",
    "probe_custom",
    "probe_phase_flip",
    "random_probe",
    "analytic_w_threshold",
    "bisect_threshold",
    "family_curve",
    "grid_scan",
    "FamilyPoint",
    "anti_w",
    "biseparable_triple",
    "family_state",
    "ghz",
    "random_density",
    "random_k_separable",
    "w_state",
    "DensityOperator",
    "SystemDims",
    "ValidationError",
    "load_state",
    "save_state",
]
