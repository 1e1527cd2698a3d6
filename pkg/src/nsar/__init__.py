"""Fixed-budget top-M arm identification.

Sequential accepts/rejects with a nonlinear pull schedule, the hardness
measures and error bound that govern it, baseline identifiers, and a
deterministic Monte Carlo harness for benchmarking them.
"""

from .core import (
    AmbiguousTopM,
    BadArmIndex,
    BadDimensions,
    BadShapeParams,
    BanditInstance,
    MeanOutOfRange,
    PullLedger,
    RewardStream,
    make_instance,
    sample_beta_means,
    true_top_m,
)
from .complexity import (
    BadExponent,
    BudgetSchedule,
    BudgetTooSmall,
    ComplexityReport,
    GapProfile,
    NotSingleArm,
    RegimeResult,
    c_p,
    complexity_scores,
    gaps,
    h_measures,
    logbar,
    prop1_bound,
    regime_classify,
    schedule,
    table1_constants,
)
from .algorithms import (
    DegenerateM,
    Recommendation,
    RoundRecord,
    empirical_gaps,
    nsar_run,
    sar_run,
    uni_run,
)
from .harness import (
    AlgorithmSpec,
    BadCounts,
    BadSetupId,
    ConfigError,
    ErrorEstimate,
    ExperimentConfig,
    HoeffdingResult,
    estimate_error,
    generate_setup,
    hoeffding_check,
    load_config_file,
    persist,
    resolve_budget,
    run_experiment,
)

__version__ = "0.1.0"

__all__ = [
    "AmbiguousTopM",
    "BadArmIndex",
    "BadDimensions",
    "BadShapeParams",
    "BanditInstance",
    "MeanOutOfRange",
    "PullLedger",
    "RewardStream",
    "make_instance",
    "sample_beta_means",
    "true_top_m",
    "BadExponent",
    "BudgetSchedule",
    "BudgetTooSmall",
    "ComplexityReport",
    "GapProfile",
    "NotSingleArm",
    "RegimeResult",
    "c_p",
    "complexity_scores",
    "gaps",
    "h_measures",
    "logbar",
    "prop1_bound",
    "regime_classify",
    "schedule",
    "table1_constants",
    "DegenerateM",
    "Recommendation",
    "RoundRecord",
    "empirical_gaps",
    "nsar_run",
    "sar_run",
    "uni_run",
    "AlgorithmSpec",
    "BadCounts",
    "BadSetupId",
    "ConfigError",
    "ErrorEstimate",
    "ExperimentConfig",
    "HoeffdingResult",
    "estimate_error",
    "generate_setup",
    "hoeffding_check",
    "load_config_file",
    "persist",
    "resolve_budget",
    "run_experiment",
    "__version__",
]
