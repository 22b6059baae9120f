"""Model-agnostic counterfactual explanations with group-equalized costs."""

from .data import (
    Dataset,
    Standardizer,
    SyntheticSpec,
    fit_standardizer,
    generate_synthetic,
    kfold_split,
    load_csv,
    save_csv,
)
from .errors import (
    ConfigError,
    DimensionMismatch,
    EmptyDataset,
    EmptyPool,
    FairCFError,
    MissingColumn,
    NoValidCandidate,
    NonBinaryLabel,
    NonFiniteObjective,
    NonNumericCell,
    SingleClassData,
    TooFewSamples,
)
from .explain import (
    CfConfig,
    CounterfactualResult,
    Method,
    cf_loss,
    closest_counterfactual,
    plausible_counterfactual,
    target_label,
    theta,
)
from .fairness import (
    CostPool,
    FairCfConfig,
    FairnessGapReport,
    compute_cost_pools,
    disadvantaged_pool,
    fair_counterfactual,
    fairness_gap,
    sample_z,
)
from .harness import (
    ExperimentConfig,
    ExperimentReport,
    ReportRow,
    emit_histogram_data,
    emit_report,
    run_experiment,
)
from .model import (
    GaussianNBModel,
    LogisticModel,
    PredictionModel,
    TrainConfig,
    TreeModel,
    accuracy,
    train_gnb,
    train_logreg,
    train_tree,
)
from .optim import MinimizeResult, SimplexConfig, minimize

__version__ = "0.1.0"
