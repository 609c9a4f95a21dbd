"""Monte Carlo laboratory for heavy-tailed tree-indexed random walks.

The package samples critical Galton-Watson trees (free, size-conditioned,
height-conditioned), runs heavy-tailed walks on them, and checks the
single-big-jump behaviour of the maximal displacement against closed-form
oracles and statistical tests.
"""

from .heavytail import ScaleSpec, StepLaw, potter_certify, step_law_from_config
from .offspring import OffspringLaw, make_zeta_stable, offspring_from_config
from .treegen import (
    CAP_EXCEEDED,
    BudgetExceeded,
    CapExceeded,
    LukPath,
    Tree,
    decode_luk,
    encode_luk,
    sample_free,
    sample_free_sizes,
    sample_height_conditioned,
    sample_size_conditioned,
    validate_tree,
)
from .walk import (
    BigJumpEvents,
    IntegrityError,
    WalkSummary,
    big_jump_events,
    run_walk,
    run_walk_with_steps,
    truncated_prefix_sums,
)
from .analysis import (
    CalibrationReport,
    GvEvaluator,
    KaramataReport,
    NonConvergence,
    calibrate_dds_constant,
    corollary_rhs,
    estimate_lambda,
    gv_tail_asymptotic,
    karamata_crosscheck,
    prop1_rhs,
    xmax_tail_exact,
)

__version__ = "0.1.0"
