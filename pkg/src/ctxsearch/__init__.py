"""Active learning for contextual search with binary feedback."""

__version__ = "0.1.0"

from .environment import (
    ContextDistribution,
    Environment,
    FeedbackSample,
    LinearUtility,
    NoiseDistribution,
    make_environment,
    benchmark_truth,
)
from .erm import LabeledSet, UnitClassifier, fit_logistic, fit_zero_one_brute, training_error
from .errors import (
    BudgetExhaustedError,
    CtxSearchError,
    DegenerateReconstructionError,
    LabelCapExceeded,
    SeparationError,
)
from .margin_al import (
    EpochTrace,
    MarginALConfig,
    epoch_schedule,
    margin_based_active_learning,
    margin_filter,
)
from .mathstats import (
    ConfidenceInterval,
    RngStream,
    angle_between,
    fit_loglog_slope,
    hoeffding_interval,
    sample_uniform_ball,
)
from .meta import (
    MetaConfig,
    Overrides,
    UtilityEstimate,
    estimation_error,
    paper_sec5_config,
    reconstruct,
    run_active,
    run_passive,
    theorem1_config,
)
from .records import RunRecord
from .trisection import TrisectionConfig, TrisectionResult, trisection_search

__all__ = [
    "__version__",
    "BudgetExhaustedError",
    "ConfidenceInterval",
    "ContextDistribution",
    "CtxSearchError",
    "DegenerateReconstructionError",
    "Environment",
    "EpochTrace",
    "FeedbackSample",
    "LabelCapExceeded",
    "LabeledSet",
    "LinearUtility",
    "MarginALConfig",
    "MetaConfig",
    "NoiseDistribution",
    "Overrides",
    "RngStream",
    "RunRecord",
    "SeparationError",
    "TrisectionConfig",
    "TrisectionResult",
    "UnitClassifier",
    "UtilityEstimate",
    "angle_between",
    "epoch_schedule",
    "estimation_error",
    "fit_loglog_slope",
    "fit_logistic",
    "fit_zero_one_brute",
    "hoeffding_interval",
    "make_environment",
    "margin_based_active_learning",
    "margin_filter",
    "paper_sec5_config",
    "reconstruct",
    "run_active",
    "run_passive",
    "sample_uniform_ball",
    "benchmark_truth",
    "theorem1_config",
    "training_error",
    "trisection_search",
]
