"""Optimal data-release mechanisms with robust local differential privacy.

Synthesizes release channels that bound the likelihood ratio of released
symbols across sensitive values, either at an empirical distribution or
uniformly over its chi-square confidence ball, while minimizing (nominal or
worst-case) expected distortion. Includes the Monte-Carlo experiment
harness that measures realized privacy and distortion under the ground
truth.
"""
from .conic import ConicProgram, ProgramBuilder, Solution, SolverConfig, SolverFailureError, solve
from .duality import (
    DUAL_CONSTANT,
    BallSampler,
    InnerMinimizer,
    PairSampler,
    SimplexSampler,
    SupportQuery,
    brute_force_support,
    conjugate_scaled_inv,
    conjugate_sqrt_sum_inv,
    support_joint,
    support_oracle_suite,
    support_projected,
    support_simplex,
)
from .evaluation import (
    Mechanism,
    PerformanceReport,
    constant_mechanism,
    identity_mechanism,
    induced_channel,
    realized_distortion,
    realized_epsilon,
)
from .experiments import (
    ExperimentConfig,
    InstanceRecord,
    SummaryStats,
    run_instance,
    run_scatter,
    run_sweep,
    summarize,
)
from .problems import (
    VARIANTS,
    BuiltProblem,
    DistortionSpec,
    ExcessiveRepairError,
    ProblemSpec,
    build_problem,
    enforce_robust_privacy,
    extract_mechanism,
    solve_problem,
    verify_solution,
    worst_privacy_support,
)
from .simplex import (
    Alphabet,
    DegenerateMarginalError,
    JointDistribution,
    SampleSet,
    chi2_statistic,
    draw_samples,
    empirical,
    sample_jeffreys,
)
from .uncertainty import (
    LiftingInfeasibleError,
    ProjectedUncertaintySet,
    UncertaintySet,
    chi2_inv_cdf,
    confidence_radius,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
