"""Numerical laboratory for vertex-reinforced random walks on the integers
with sub-linear, regularly varying weights.

Layers, bottom up:

* :mod:`vrrwlab.weights` — weight families w and their slowly varying parts.
* :mod:`vrrwlab.grid` / :mod:`vrrwlab.calculus` — geometric-grid functions,
  the primitive W(x) = int_0^x du/w(u), its inverse, and the conjugate axis.
* :mod:`vrrwlab.operators` — the iterated integral operators whose first
  bounded iterate gives the localization indices.
* :mod:`vrrwlab.walks` / :mod:`vrrwlab.coupling` — exact simulation of the
  walk and its comparison processes, with replayable randomness.
* :mod:`vrrwlab.experiments` — localization detection, profile comparison,
  pathwise identities, and campaign orchestration.
* :mod:`vrrwlab.cli` — the ``vrrwlab`` command-line front end.
"""

from .weights import (
    WeightSpec,
    linear_weight,
    power_weight,
    polylog_weight,
    critical_weight,
    table_weight,
    parse_weight,
    eval_w,
    eval_ell,
    check_assumption,
)
from .calculus import compute_W, compute_W_psi, invert_W, conjugate_axis
from .deepaxis import deep_axis, deep_index_probe, deep_sandwich_fit
from .grid import GridFn, ScaledIdentity, save_gridfn, load_gridfn
from .operators import (
    apply_G,
    apply_H,
    classify_tail,
    phi_family,
    conjugate_iterate,
    g_sequence,
    index_sweep,
    index_limits,
    growth_sandwich_check,
    psi_profile,
    build_f_eta,
    choose_epsilon,
)
from .walks import (
    LedgerState,
    WalkKind,
    WalkRun,
    RandomField,
    vrrw_z,
    reflected_vrrw,
    tilde_walk,
    hat_walk,
    hat_restricted,
    breve_walk,
    trivial_state,
    symmetrize_state,
    prob_left,
    kernel_probs,
    step,
    init_run,
    run_walk,
    simulate,
    state_at,
    enumerate_exact,
    endpoint_law,
    total_variation,
)
from .coupling import (
    CouplingRecord,
    paired_simulate,
    compare_runs,
    monitor_good_event,
    check_corollary_consequences,
    replay_step,
)
from .experiments import (
    DiagnosticSeries,
    LocalizationReport,
    ProfileReport,
    UrnReport,
    CampaignConfig,
    compute_diagnostics,
    detect_localization,
    profile_compare,
    pathwise_identity_check,
    urn_balance,
    campaign,
)

__version__ = "0.1.0"

__all__ = [
    "WeightSpec",
    "linear_weight",
    "power_weight",
    "polylog_weight",
    "critical_weight",
    "table_weight",
    "parse_weight",
    "eval_w",
    "eval_ell",
    "check_assumption",
    "compute_W",
    "compute_W_psi",
    "invert_W",
    "conjugate_axis",
    "deep_axis",
    "deep_index_probe",
    "deep_sandwich_fit",
    "GridFn",
    "ScaledIdentity",
    "save_gridfn",
    "load_gridfn",
    "apply_G",
    "apply_H",
    "classify_tail",
    "phi_family",
    "conjugate_iterate",
    "g_sequence",
    "index_sweep",
    "index_limits",
    "growth_sandwich_check",
    "psi_profile",
    "build_f_eta",
    "choose_epsilon",
    "LedgerState",
    "WalkKind",
    "WalkRun",
    "RandomField",
    "vrrw_z",
    "reflected_vrrw",
    "tilde_walk",
    "hat_walk",
    "hat_restricted",
    "breve_walk",
    "trivial_state",
    "symmetrize_state",
    "prob_left",
    "kernel_probs",
    "step",
    "init_run",
    "run_walk",
    "simulate",
    "state_at",
    "enumerate_exact",
    "endpoint_law",
    "total_variation",
    "CouplingRecord",
    "paired_simulate",
    "compare_runs",
    "monitor_good_event",
    "check_corollary_consequences",
    "replay_step",
    "DiagnosticSeries",
    "LocalizationReport",
    "ProfileReport",
    "UrnReport",
    "CampaignConfig",
    "compute_diagnostics",
    "detect_localization",
    "profile_compare",
    "pathwise_identity_check",
    "urn_balance",
    "campaign",
    "__version__",
]
