"""Stochastic smoothed-gradient methods for min-max problems.

The package bundles four gradient-based saddle-point solvers (simultaneous,
max-oracle, epoch-alternating, and randomized single-sample descent/ascent),
a small suite of synthetic min-max problems with exact gradient oracles,
step-size and probability schedules backed by explicit feasibility bounds,
and diagnostics that measure the quantities those bounds are stated in.
"""

from gdakit.core import (
    CapabilityError,
    ConstraintError,
    ConstructionError,
    DimensionError,
    DivergenceError,
    GdakitError,
    InsufficientDataError,
    OracleViolation,
    ParameterError,
    RngStream,
    gauss_vec,
)
from gdakit.diagnostics import (
    CertificateViolation,
    ContractionReport,
    DescentReport,
    PhiEstimate,
    RateSummary,
    SweepReport,
    TraceRecord,
    contraction_check,
    contraction_sweep,
    descent_check,
    fd_gradient_check,
    h_metric,
    lyapunov,
    phi_inner,
    rate_summary,
)
from gdakit.optimizers import (
    DiagConfig,
    Esgda,
    OptState,
    Rsgda,
    RunResult,
    Sgda,
    SgdMax,
    esgda_step,
    evals_per_step,
    init_state,
    rsgda_step,
    run,
    sgda_step,
    sgdmax_step,
)
from gdakit.problems import (
    GradSample,
    JointPoint,
    OracleReport,
    Problem,
    ProblemConstants,
    check_oracle,
    load_dataset,
    make_bilinear,
    make_gaussian_wgan,
    make_ncpl_quadratic,
    make_robust_regression,
    make_scsc_quadratic,
    random_ncpl_instance,
    random_scsc_instance,
    save_dataset,
)
from gdakit.schedules import (
    AdaPSchedule,
    StepConstraints,
    StepPlan,
    adaptive_p,
    constant_plan,
    optimal_p,
    p_max,
    plan_violations,
    polynomial_schedule,
    require_feasible,
    step_constraints,
)

__version__ = "0.1.0"

__all__ = [
    "AdaPSchedule",
    "CapabilityError",
    "CertificateViolation",
    "ConstraintError",
    "ConstructionError",
    "ContractionReport",
    "DescentReport",
    "DiagConfig",
    "DimensionError",
    "DivergenceError",
    "Esgda",
    "GdakitError",
    "GradSample",
    "InsufficientDataError",
    "JointPoint",
    "OptState",
    "OracleReport",
    "OracleViolation",
    "ParameterError",
    "PhiEstimate",
    "Problem",
    "ProblemConstants",
    "RateSummary",
    "RngStream",
    "Rsgda",
    "RunResult",
    "Sgda",
    "SgdMax",
    "StepConstraints",
    "StepPlan",
    "SweepReport",
    "TraceRecord",
    "adaptive_p",
    "check_oracle",
    "constant_plan",
    "contraction_check",
    "contraction_sweep",
    "descent_check",
    "esgda_step",
    "evals_per_step",
    "fd_gradient_check",
    "gauss_vec",
    "h_metric",
    "init_state",
    "load_dataset",
    "lyapunov",
    "make_bilinear",
    "make_gaussian_wgan",
    "make_ncpl_quadratic",
    "make_robust_regression",
    "make_scsc_quadratic",
    "optimal_p",
    "p_max",
    "phi_inner",
    "plan_violations",
    "polynomial_schedule",
    "random_ncpl_instance",
    "random_scsc_instance",
    "rate_summary",
    "require_feasible",
    "rsgda_step",
    "run",
    "save_dataset",
    "sgda_step",
    "sgdmax_step",
    "step_constraints",
    "__version__",
]
