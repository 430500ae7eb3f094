"""Transductive Venn prediction on top of the softmax network.

For a new attribute vector, every candidate label is assumed in turn: the
network is retrained on the training set extended with the assumed pair, all
l+1 examples are assigned taxonomy categories from the network outputs, and
the label frequencies of the new example's category give one probability
distribution per candidate. The c distributions are summarized by per-class
[lower, upper] probability bounds, their mean, and the predicted class.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .data import Dataset, Standardizer
from .mlp import MLPConfig, TrainingFailedError, forward, train_with_restarts
from .seeding import TAG_PREDICT, derive_seed
from .taxonomy import TaxonomyRule, category_of


@dataclass(frozen=True)
class PredictionResult:
    """Prediction with calibrated per-class probability bounds.

    `multiprobability` is the c-by-c matrix whose row k is the label
    distribution obtained under candidate label k; `lower`/`upper` are its
    column minima/maxima and `mean_probs` its column means.
    """

    predicted: int
    mean_probs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    multiprobability: np.ndarray

    @property
    def interval(self) -> tuple[float, float]:
        """Probability bounds for the predicted class."""
        return float(self.lower[self.predicted]), float(self.upper[self.predicted])

    @property
    def error_interval(self) -> tuple[float, float]:
        """Bounds on the probability that the prediction is wrong."""
        return 1.0 - float(self.upper[self.predicted]), 1.0 - float(self.lower[self.predicted])

    def to_dict(self, class_names=None) -> dict:
        names = list(class_names) if class_names is not None else list(range(len(self.mean_probs)))
        return {
            "predicted": names[self.predicted],
            "mean_probs": {str(names[j]): float(p) for j, p in enumerate(self.mean_probs)},
            "intervals": {
                str(names[j]): [float(self.lower[j]), float(self.upper[j])]
                for j in range(len(self.mean_probs))
            },
            "error_interval": list(self.error_interval),
        }


def _train_candidate(X_norm, y_extended, n_classes, config):
    model = train_with_restarts(config, X_norm, y_extended, n_classes)
    return forward(model, X_norm)


def transduce(
    train: Dataset,
    x_new: np.ndarray,
    config: MLPConfig,
    seed_path: tuple[int, ...] = (TAG_PREDICT,),
    n_jobs: int = 1,
) -> np.ndarray:
    """Per-candidate-label network outputs over the extended set.

    Returns an array of shape (c, l+1, c): entry [k, i] is the output vector
    for example i after training on the set extended with (x_new, label k).
    Attributes are re-standardized on each extended set; the candidate
    trainings are independent and run in parallel when n_jobs != 1. Seeds
    derive from (config.seed, *seed_path, candidate), so results do not
    depend on n_jobs.
    """
    x_new = np.asarray(x_new, dtype=np.float64).reshape(-1)
    if x_new.shape[0] != train.n_attributes:
        raise ValueError(
            f"x_new has {x_new.shape[0]} attributes, dataset has {train.n_attributes}"
        )
    c = train.n_classes
    X_extended = np.vstack([train.X, x_new])
    X_norm = Standardizer.fit(X_extended).transform(X_extended)

    def candidate_args(k):
        y_extended = np.concatenate([train.y, [k]])
        cfg = replace(config, seed=derive_seed(config.seed, *seed_path, k))
        return X_norm, y_extended, c, cfg

    try:
        if n_jobs == 1:
            outputs = [_train_candidate(*candidate_args(k)) for k in range(c)]
        else:
            outputs = Parallel(n_jobs=n_jobs)(
                delayed(_train_candidate)(*candidate_args(k)) for k in range(c)
            )
    except TrainingFailedError as err:
        raise TrainingFailedError(f"candidate-label training failed: {err}") from err
    return np.stack(outputs)


def multiprobability_from_outputs(
    outputs: np.ndarray, y_train: np.ndarray, rule: TaxonomyRule
) -> np.ndarray:
    """Empirical label distributions from precomputed candidate outputs.

    `outputs[k]` holds the network outputs for all l+1 extended-set examples
    under candidate label k (the new example last). Row k of the result is
    the label frequency vector of the new example's category, counting the
    assumed pair itself.
    """
    outputs = np.asarray(outputs)
    c = outputs.shape[0]
    if outputs.ndim != 3 or outputs.shape[2] != c:
        raise ValueError(f"expected outputs of shape (c, l+1, c), got {outputs.shape}")
    y_train = np.asarray(y_train, dtype=np.int64)
    if outputs.shape[1] != y_train.size + 1:
        raise ValueError(
            f"outputs cover {outputs.shape[1]} examples, expected {y_train.size + 1}"
        )

    P = np.zeros((c, c))
    for k in range(c):
        keys = [category_of(rule, o) for o in outputs[k]]
        new_key = keys[-1]
        members = [i for i, key in enumerate(keys) if key == new_key]
        assert members, "the new example's category contains at least itself"
        y_extended = np.concatenate([y_train, [k]])
        counts = np.bincount(y_extended[members], minlength=c)
        P[k] = counts / len(members)
    return P


def multiprobability(
    train: Dataset,
    x_new: np.ndarray,
    rule: TaxonomyRule,
    config: MLPConfig,
    seed_path: tuple[int, ...] = (TAG_PREDICT,),
    n_jobs: int = 1,
) -> np.ndarray:
    """Row-stochastic c-by-c matrix of per-candidate label distributions."""
    rule.validate_for(train.n_classes)
    outputs = transduce(train, x_new, config, seed_path, n_jobs)
    return multiprobability_from_outputs(outputs, train.y, rule)


def aggregate(P: np.ndarray) -> PredictionResult:
    """Summarize a multiprobability matrix into a prediction with bounds."""
    P = np.asarray(P, dtype=np.float64)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {P.shape}")
    if P.min() < 0.0 or P.max() > 1.0 or not np.allclose(P.sum(axis=1), 1.0, atol=1e-9):
        raise ValueError("matrix rows must be probability distributions")
    mean_probs = P.mean(axis=0)
    predicted = int(np.argmax(mean_probs))
    return PredictionResult(
        predicted=predicted,
        mean_probs=mean_probs,
        lower=P.min(axis=0),
        upper=P.max(axis=0),
        multiprobability=P,
    )


def predict_one(
    train: Dataset,
    x_new: np.ndarray,
    rule: TaxonomyRule,
    config: MLPConfig,
    seed_path: tuple[int, ...] = (TAG_PREDICT,),
    n_jobs: int = 1,
) -> PredictionResult:
    return aggregate(multiprobability(train, x_new, rule, config, seed_path, n_jobs))


class VennPredictor(BaseEstimator, ClassifierMixin):
    """Venn predictor with the softmax network as underlying algorithm.

    Fitting only stores the training data; each call to `predict` retrains
    the network once per (example, candidate label), which is what buys the
    calibration guarantee. Expect seconds per example on small datasets.

    Parameters
    ----------
    taxonomy : str
        Category rule, one of "v1".."v5".
    theta : float or None
        Rule threshold; None selects the rule's default.
    hidden_units, n_restarts, validation_fraction, max_epochs, patience :
        Underlying network training session (see `SoftmaxMLPClassifier`).
    n_jobs : int
        Parallelism across examples during `predict`.
    random_state : int
        Root seed. Per-example seeds also involve the example's position in
        the argument of `predict`.
    """

    def __init__(
        self,
        taxonomy: str = "v1",
        theta: float | None = None,
        hidden_units: int = 5,
        n_restarts: int = 3,
        validation_fraction: float = 0.30,
        max_epochs: int = 200,
        patience: int = 20,
        n_jobs: int = 1,
        random_state: int = 0,
    ):
        self.taxonomy = taxonomy
        self.theta = theta
        self.hidden_units = hidden_units
        self.n_restarts = n_restarts
        self.validation_fraction = validation_fraction
        self.max_epochs = max_epochs
        self.patience = patience
        self.n_jobs = n_jobs
        self.random_state = random_state

    def _rule(self) -> TaxonomyRule:
        return TaxonomyRule(self.taxonomy, self.theta)

    def _config(self) -> MLPConfig:
        return MLPConfig(
            hidden_units=self.hidden_units,
            num_restarts=self.n_restarts,
            validation_fraction=self.validation_fraction,
            max_epochs=self.max_epochs,
            patience=self.patience,
            seed=self.random_state,
        )

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.classes_, y_indices = np.unique(y, return_inverse=True)
        if len(self.classes_) < 2:
            raise ValueError("need at least 2 classes")
        self._rule().validate_for(len(self.classes_))
        self.train_ = Dataset(X, y_indices, tuple(str(c) for c in self.classes_))
        self.n_features_in_ = X.shape[1]
        return self

    def predict_full(self, X) -> list[PredictionResult]:
        """One `PredictionResult` per row of X."""
        check_is_fitted(self, "train_")
        X = check_array(X)
        rule, config = self._rule(), self._config()

        def one(i):
            return predict_one(self.train_, X[i], rule, config, seed_path=(TAG_PREDICT, i))

        if self.n_jobs == 1:
            return [one(i) for i in range(X.shape[0])]
        return Parallel(n_jobs=self.n_jobs)(delayed(one)(i) for i in range(X.shape[0]))

    def predict(self, X):
        return self.classes_[[r.predicted for r in self.predict_full(X)]]

    def predict_proba(self, X):
        """Mean of the per-candidate distributions, one row per example."""
        return np.array([r.mean_probs for r in self.predict_full(X)])

    def predict_interval(self, X):
        """(n, 2) array of [lower, upper] bounds for each predicted class."""
        return np.array([r.interval for r in self.predict_full(X)])
