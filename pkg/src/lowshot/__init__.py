"""lowshot: F-score estimation for binary classifiers on a labeling budget.

Estimate precision/recall/F1 of a classifier over a large unlabeled pool
from a handful of oracle labels, via adaptive calibration and importance
sampling, with a per-run variance estimate. Ships baselines, a synthetic
benchmark harness, and a session-oriented HTTP labeling service.
"""

from .acis import AcisConfig, AcisResult, AcisSession, acis_run
from .baselines import (
    BaselineResult,
    acis_last_estimate,
    calibrate_infer_estimate,
    fit_gmm_1d,
    gmm_estimate,
    herding_estimate,
    herding_select,
    rand_estimate,
    sawade_estimate,
    silverman_bandwidth,
    topk_estimate,
)
from .bench import (
    METHOD_ORDER,
    TrialReport,
    emit_report,
    finite_dataset_variance,
    load_report,
    mse_identity_holds,
    run_trials,
    trial_seed,
)
from .calibration import (
    BlendedCalibrator,
    Calibrator,
    SigmoidCalibrator,
    StepCalibrator,
    blend_calibrators,
    clamp_rescale,
    fit_calibration_prior,
    fit_isotonic,
    fit_platt,
    pava,
)
from .errors import (
    AllZeroMassError,
    AlreadyLabeledError,
    DegenerateFitError,
    DegenerateMetricError,
    DegenerateWeightsError,
    EmptyInputError,
    IdMismatchError,
    InsufficientDrawsError,
    InvalidLabelError,
    LowshotError,
    MissingLabelError,
    NoEstimateYetError,
    NotFoundError,
    RegenerationLimitError,
    ReportIoError,
    SchemaMismatchError,
    SessionCompleteError,
    SessionExistsError,
    StorageError,
    UnknownItemError,
    ValidationError,
    ZeroWeightMassError,
)
from .estimator import (
    IterationRecord,
    LabeledDraw,
    SamplingPlan,
    combine_estimates,
    exact_fscore,
    importance_distribution,
    is_fscore,
    make_draws,
    restrict_domain,
    reuse_draws,
    reuse_validation_set,
    sample_until_new,
    uniform_plan,
    variance_estimate,
    weighted_sample,
    worst_case_variance,
)
from .pool import NO_LABEL, ScoredPool, load_pool, pool_from_items, save_pool
from .synth import SynthConfig, config_from_dict, pool_with_threshold, synth_generate, warp_scores

__version__ = "0.1.0"

__all__ = [
    "AcisConfig", "AcisResult", "AcisSession", "acis_run",
    "BaselineResult", "acis_last_estimate", "calibrate_infer_estimate",
    "fit_gmm_1d", "gmm_estimate", "herding_estimate", "herding_select",
    "rand_estimate", "sawade_estimate", "silverman_bandwidth", "topk_estimate",
    "METHOD_ORDER", "TrialReport", "emit_report", "finite_dataset_variance",
    "load_report", "mse_identity_holds", "run_trials", "trial_seed",
    "BlendedCalibrator", "Calibrator", "SigmoidCalibrator", "StepCalibrator",
    "blend_calibrators", "clamp_rescale", "fit_calibration_prior",
    "fit_isotonic", "fit_platt", "pava",
    "AllZeroMassError", "AlreadyLabeledError", "DegenerateFitError",
    "DegenerateMetricError", "DegenerateWeightsError", "EmptyInputError",
    "IdMismatchError", "InsufficientDrawsError", "InvalidLabelError",
    "LowshotError", "MissingLabelError", "NoEstimateYetError", "NotFoundError",
    "RegenerationLimitError", "ReportIoError", "SchemaMismatchError",
    "SessionCompleteError", "SessionExistsError", "StorageError",
    "UnknownItemError", "ValidationError", "ZeroWeightMassError",
    "IterationRecord", "LabeledDraw", "SamplingPlan", "combine_estimates",
    "exact_fscore", "importance_distribution", "is_fscore", "make_draws",
    "restrict_domain", "reuse_draws", "reuse_validation_set", "sample_until_new",
    "uniform_plan", "variance_estimate", "weighted_sample", "worst_case_variance",
    "NO_LABEL", "ScoredPool", "load_pool", "pool_from_items", "save_pool",
    "SynthConfig", "config_from_dict", "pool_with_threshold", "synth_generate",
    "warp_scores",
]
