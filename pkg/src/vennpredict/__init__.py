"""Venn prediction with a neural-network underlying classifier.

Produces calibrated lower/upper bounds for the probability of each class,
alongside the usual point prediction, by retraining a small softmax network
per candidate label and reading label frequencies off taxonomy categories.
"""

from .data import (
    DataFormatError,
    Dataset,
    SplitPlan,
    Standardizer,
    load_csv,
    online_stream,
    save_csv,
    shuffle_dataset,
    split,
)
from .evaluation import (
    BatchMetrics,
    BatchReport,
    OnlineBaselineResult,
    OnlineVennResult,
    brier_score,
    evaluate_probabilistic,
    reliability,
    run_batch,
    run_online_nn,
    run_online_venn,
    two_sided_pvalue,
)
from .mlp import (
    MLPConfig,
    MLPModel,
    SoftmaxMLPClassifier,
    TrainingDivergedError,
    TrainingFailedError,
    cross_entropy,
    forward,
    one_hot,
    scg_train,
    train_with_restarts,
)
from .taxonomy import TAXONOMY_KINDS, TaxonomyRule, category_of, key_to_str
from .venn import (
    PredictionResult,
    VennPredictor,
    aggregate,
    multiprobability,
    multiprobability_from_outputs,
    predict_one,
    transduce,
)

__version__ = "0.1.0"

__all__ = [
    "DataFormatError",
    "Dataset",
    "SplitPlan",
    "Standardizer",
    "load_csv",
    "online_stream",
    "save_csv",
    "shuffle_dataset",
    "split",
    "BatchMetrics",
    "BatchReport",
    "OnlineBaselineResult",
    "OnlineVennResult",
    "brier_score",
    "evaluate_probabilistic",
    "reliability",
    "run_batch",
    "run_online_nn",
    "run_online_venn",
    "two_sided_pvalue",
    "MLPConfig",
    "MLPModel",
    "SoftmaxMLPClassifier",
    "TrainingDivergedError",
    "TrainingFailedError",
    "cross_entropy",
    "forward",
    "one_hot",
    "scg_train",
    "train_with_restarts",
    "TAXONOMY_KINDS",
    "TaxonomyRule",
    "category_of",
    "key_to_str",
    "PredictionResult",
    "VennPredictor",
    "aggregate",
    "multiprobability",
    "multiprobability_from_outputs",
    "predict_one",
    "transduce",
    "__version__",
]
