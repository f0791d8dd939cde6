"""Exact-arithmetic window schemes on amenable groups.

The package builds families of displaced finite windows (left schemes) on
concrete groups, certifies every defining identity with integer and radical
arithmetic, and derives the step-vector norms and nonsingular product-measure
diagnostics that the schemes exist to feed.
"""
from __future__ import annotations

from .bernoulli import (
    Cylinder,
    HellingerSum,
    ProductMeasure,
    conservativity_diagnostic,
    cylinder,
    cylinder_prob,
    cylinder_pullback,
    delta_gate,
    eps_gate,
    hellinger_bracket,
    kakutani_pairs,
    kakutani_report,
    kakutani_sum,
    pushforward_check,
    pushforward_window_check,
    sample,
    sample_configs,
    translated_marginal,
)
from .catalog import (
    ConfigError,
    build_window,
    extension_from_config,
    group_from_config,
    load_window,
    refusal_reason,
)
from .cocycle import (
    StepVector,
    asym_cocycle,
    cocycle_norm_report,
    diff_norm_sq,
    dihedral_eta,
    dihedral_left_partial,
    dihedral_right_partial,
    dinf_no_scheme_check,
    fc_transfer_check,
    fc_window_bound,
    phi_norm_identity,
    step_vector,
    virtually_cyclic_obstruction,
)
from .folner import (
    FolnerFamily,
    FolnerSearchError,
    disjointify,
    heisenberg_boxes,
    symmetric_vector,
    worst_ratios,
    wreath_rectangles,
    z_boxes,
)
from .groups import (
    CyclicGroup,
    DihedralGroup,
    DirectProductGroup,
    Elem,
    FinSet,
    GroupCtx,
    GroupError,
    HeisenbergGroup,
    ZdGroup,
    ball,
    boundary_count,
    boundary_ratio,
    conjugacy_class,
    finset,
    finset_from_json,
    finset_to_json,
    set_algebra,
    set_invert,
    set_translate,
    word_decompose,
)
from .lifting import (
    ExtensionData,
    Section,
    build_section,
    cocycle_alpha,
    direct_product_extension,
    heis_center_extension,
    kernel_folner,
    lift_scheme,
    lift_set,
    sample_alphas,
)
from .nilpotent import (
    BoxParams,
    MalcevPresentation,
    Nil2Group,
    box_count_checks,
    build_heisenberg_scheme,
    direction_check,
    find_heisenberg_direction,
    h5_presentation,
    heisenberg_box_profile,
    heisenberg_presentation,
    int_det,
    nil2_semidirect,
    nil2_split,
    nil2_tower_input,
    smith_normal_form,
    snf_check,
    window_example_box,
    z_word_certificate,
)
from .radicals import Rad, exp_bounds, exp_lt, sqrt_bounds
from .report import CheckRow, VerifyReport, fmt_q, parse_q
from .scheme import (
    KappaDecl,
    SchemeError,
    SchemeWindow,
    leftsch_check,
    phi_from_a,
    phi_partial,
    rearrange,
    require_leftsch,
    verify_scheme,
)
from .semidirect import (
    BSGroup,
    SemidirectGroup,
    TowerInput,
    WreathGroup,
    bs_input,
    bs_schedule,
    lamp_folner_set,
    level_profile,
    phi_power,
    tower_build,
    tower_check,
    wreath_input,
)

__version__ = "0.1.0"
