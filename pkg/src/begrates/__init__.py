"""Mean-field three-state spin model on the complete graph.

Exact finite-n laws of the total spin, phase-diagram analytics, polynomial
comparison densities, exchangeable-pair Kolmogorov bounds, a seeded heat-bath
sampler and a 42-case convergence-rate harness.
"""

__version__ = "0.1.0"

from .cases import CaseSpec, case_by_id, case_catalog, comparison_density, predicted_rate
from .density import (
    PolyDensity,
    SteinConstants,
    density_from_regression,
    estimate_stein_constants,
    normalize_density,
    stein_solution,
)
from .errors import (
    BegratesError,
    CapExceededError,
    ComputationError,
    DegenerateFitError,
    InvalidCaseParametersError,
    NonIntegrableDensityError,
    ScheduleUnderflowError,
    ValidationError,
)
from .exact import (
    JointLaw,
    MomentSet,
    build_joint_law,
    hs_check,
    kolmogorov_distance,
    moment,
    moment_set,
    pair_covariance,
)
from .mcmc import ChainResult, chain_seeds, run_chain
from .model import (
    BETA_C,
    ModelParams,
    Region,
    RegionTag,
    Schedule,
    ScheduleMode,
    classify_region,
    critical_K,
    cumulant_gf,
    f_single,
    g_derivs_at_zero,
    G_eval,
    G_prime,
    legendre_rate,
    minimize_G,
    pair_conditional_funcs,
    schedule_eval,
)
from .rates import RateReport, fit_loglog, run_all, run_case
from .stein import (
    BoundReport,
    RegressionDecomposition,
    conditional_step_moments,
    evaluate_bound,
    normal_bound,
    regression_decompose,
    variance_term,
)

__all__ = [name for name in dir() if not name.startswith("_")]
