"""Evidence feed-forward hidden Markov models.

A discrete HMM extended with a per-state observation-to-observation
tensor, plus the machinery around it: stabilized inference, EM training,
brute-force oracles for testing, trend-discretization pipelines, and
per-class maximum-likelihood classification.
"""

from .classify import (
    Classification,
    Classifier,
    EvalReport,
    classify_sequence,
    evaluate,
    split_dataset,
    split_indices,
    train_classifier,
)
from .inference import (
    BackwardResult,
    PosteriorStats,
    StatePath,
    TrellisResult,
    backward,
    forward,
    posteriors,
    viterbi,
)
from .learning import (
    SufficientStats,
    TrainConfig,
    TrainReport,
    accumulate_stats,
    em_train,
    init_model,
    merge_stats,
    reestimate,
)
from .model import (
    EFF,
    STANDARD,
    DataFormatError,
    DegeneracyError,
    EffHmmModel,
    LabeledDataset,
    ObservationSequence,
    load_model,
    save_model,
    validate,
)
from .pipelines import (
    BinSpec,
    IrisRecord,
    PointFrame,
    TrendSymbol,
    bin_index,
    bounding_box_ratio,
    fit_bins,
    iris_trend_sequence,
    ratio_group,
    ratio_trend_sequence,
    sample_sequence,
)

__version__ = "0.1.0"

__all__ = [
    "BackwardResult",
    "BinSpec",
    "Classification",
    "Classifier",
    "DataFormatError",
    "DegeneracyError",
    "EFF",
    "EffHmmModel",
    "EvalReport",
    "IrisRecord",
    "LabeledDataset",
    "ObservationSequence",
    "PointFrame",
    "PosteriorStats",
    "STANDARD",
    "StatePath",
    "SufficientStats",
    "TrainConfig",
    "TrainReport",
    "TrellisResult",
    "TrendSymbol",
    "accumulate_stats",
    "backward",
    "bin_index",
    "bounding_box_ratio",
    "classify_sequence",
    "em_train",
    "evaluate",
    "fit_bins",
    "forward",
    "init_model",
    "iris_trend_sequence",
    "load_model",
    "merge_stats",
    "posteriors",
    "ratio_group",
    "ratio_trend_sequence",
    "reestimate",
    "sample_sequence",
    "save_model",
    "split_dataset",
    "split_indices",
    "train_classifier",
    "validate",
    "viterbi",
]
