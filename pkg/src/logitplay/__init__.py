"""Logit fictitious play for entropy-regularized zero-sum games.

The stochastic and deterministic dynamics, the generalized Frank-Wolfe
comparison for composite problems, and checkers for the rate bounds that
govern them.
"""

from .composite import (
    CompositeProblem,
    composite_gap,
    dlfp_composite_step,
    entropic_instance,
    gfw_step,
    kappa_bar,
    primal_value,
    run_comparison,
    run_dlfp_composite,
    run_gfw,
    verify_composite,
)
from .dlfp import (
    SaddlePoint,
    Trace,
    VerificationReport,
    dlfp_step,
    run_dlfp,
    solve_fixed_point,
    verify_recursions,
)
from .errors import (
    ConfigurationError,
    InvalidInputError,
    LogitPlayError,
    NonConvergenceError,
    NumericError,
    ParseError,
    UnsupportedScheduleError,
)
from .game import (
    JointState,
    RegularizedGame,
    conjugate_grad_x,
    conjugate_grad_y,
    conjugate_x,
    conjugate_y,
    duality_gap,
    duality_gap_alt,
    duality_gap_conjugate,
    entropy,
    gap_upper_bound,
    kappa,
    logit_response_x,
    logit_response_y,
    saddle_value,
)
from .lfp import (
    AggregateTrace,
    LfpState,
    LocalityEstimate,
    NoiseRecord,
    estimate_noise_stats,
    global_complexity_estimate,
    lfp_step,
    locality_constants,
    monte_carlo,
    run_lfp,
    sample_categorical,
    theorem4_bound,
)
from .schedules import (
    Constant,
    NesterovGFW,
    RationalQ,
    check_step_size_conditions,
    constant_optimal_step,
    lemma4_bound,
    parse_schedule,
    rho,
    step_size,
    theorem3_bound,
)

__version__ = "0.1.0"
