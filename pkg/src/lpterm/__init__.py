"""Interior-point LP toolkit: exact termination by support rounding and a
Gaussian-perturbation experiment harness with closed-form bound checks."""

from .harness import (
    DEFAULT_EPS_GRID,
    ExperimentConfig,
    LogDeltaRow,
    TailBoundRow,
    TrialRecord,
    load_experiment_config,
    log_delta_summary,
    run_experiment,
    standard_base_instance,
    tail_bound_report,
    write_csv,
)
from .ipm import SolveResult, SolverOptions, solve
from .linalg import SingularMatrixError, distance_to_span, solve_square
from .lp import (
    LinearProgram,
    MatrixNorms,
    PrimalDualPoint,
    ResidualReport,
    SolveStatus,
    SpectralNormError,
    is_dual_feasible,
    is_primal_feasible,
    lp_from_dict,
    lp_to_dict,
    load_lp,
    matrix_norms,
    residuals,
    save_lp,
    validate,
)
from .oracle import (
    CertifiedBoundViolationError,
    DeltaProbeResult,
    EnumerationBudgetError,
    OracleResult,
    brute_force_solve,
    delta_probe,
)
from .smoothing import (
    PerturbationSpec,
    gaussian_ratio_bound_check,
    gaussian_tail_bound_check,
    norm_expectation_check,
    normalize_base,
    perturb,
    tail_to_log_expectation_check,
)
from .termination import (
    ClosenessReport,
    GeomQuantities,
    RoundingFailureError,
    SupportPair,
    candidate_supports,
    check_closeness_lemmas,
    geometric_quantities,
    round_primal_dual,
    verify_candidate,
)

__version__ = "0.1.0"
