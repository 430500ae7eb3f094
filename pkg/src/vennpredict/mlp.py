"""Single-hidden-layer tanh/softmax network trained by scaled conjugate gradient.

The functional core (`forward`, `cross_entropy`, `loss_and_gradient`,
`scg_train`, `train_with_restarts`) operates on a flat weight vector so the
optimizer stays generic; `SoftmaxMLPClassifier` wraps it in an estimator API.
Training minimizes cross-entropy summed over examples, with early stopping on
a held-out validation split and selection of the best random restart.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .data import Standardizer, round_half_up
from .scg import scg_steps
from .seeding import TAG_RESTART, TAG_VAL_SPLIT, derive_seed, rng_from

PROB_FLOOR = 1e-12  # log clamp inside the cross-entropy


class TrainingDivergedError(RuntimeError):
    """Training loss became non-finite; carries the epoch where it happened."""

    def __init__(self, epoch: int):
        super().__init__(f"training loss became non-finite at epoch {epoch}")
        self.epoch = epoch


class TrainingFailedError(RuntimeError):
    """Every restart of a training session aborted."""


@dataclass(frozen=True)
class MLPConfig:
    """Training configuration for one network."""

    hidden_units: int
    num_restarts: int = 3
    validation_fraction: float = 0.30
    max_epochs: int = 200
    patience: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.hidden_units < 1:
            raise ValueError(f"hidden_units must be >= 1, got {self.hidden_units}")
        if self.num_restarts < 1:
            raise ValueError(f"num_restarts must be >= 1, got {self.num_restarts}")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValueError(
                f"validation_fraction must be in (0, 1), got {self.validation_fraction}"
            )


@dataclass(frozen=True)
class MLPShape:
    n_inputs: int
    n_hidden: int
    n_outputs: int

    @property
    def n_weights(self) -> int:
        d, h, c = self.n_inputs, self.n_hidden, self.n_outputs
        return h * d + h + c * h + c


@dataclass(frozen=True)
class MLPModel:
    """Trained network: layer shapes plus one flat weight vector."""

    shape: MLPShape
    weights: np.ndarray

    def __post_init__(self):
        if self.weights.shape != (self.shape.n_weights,):
            raise ValueError(
                f"weight vector has {self.weights.shape}, expected ({self.shape.n_weights},)"
            )

    def layers(self):
        return unpack_weights(self.shape, self.weights)


def unpack_weights(shape: MLPShape, w: np.ndarray):
    """Views (W1, b1, W2, b2) into the flat vector, in layer order."""
    d, h, c = shape.n_inputs, shape.n_hidden, shape.n_outputs
    i0 = h * d
    i1 = i0 + h
    i2 = i1 + c * h
    return w[:i0].reshape(h, d), w[i0:i1], w[i1:i2].reshape(c, h), w[i2:]


def init_weights(shape: MLPShape, rng: np.random.Generator) -> np.ndarray:
    """Symmetric uniform init, each layer scaled by 1/sqrt(fan-in)."""
    d, h, c = shape.n_inputs, shape.n_hidden, shape.n_outputs
    bound1 = 1.0 / np.sqrt(d)
    bound2 = 1.0 / np.sqrt(h)
    return np.concatenate([
        rng.uniform(-bound1, bound1, size=h * d),
        rng.uniform(-bound1, bound1, size=h),
        rng.uniform(-bound2, bound2, size=c * h),
        rng.uniform(-bound2, bound2, size=c),
    ])


def softmax_rows(Z: np.ndarray) -> np.ndarray:
    E = np.exp(Z - Z.max(axis=1, keepdims=True))
    return E / E.sum(axis=1, keepdims=True)


def _forward_parts(shape: MLPShape, w: np.ndarray, X: np.ndarray):
    W1, b1, W2, b2 = unpack_weights(shape, w)
    H = np.tanh(X @ W1.T + b1)
    return H, softmax_rows(H @ W2.T + b2)


def forward(model: MLPModel, X: np.ndarray) -> np.ndarray:
    """Class-probability outputs, one row per example."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.shape.n_inputs:
        raise ValueError(
            f"input has {X.shape[1]} attributes, model expects {model.shape.n_inputs}"
        )
    return _forward_parts(model.shape, model.weights, X)[1]


def one_hot(y: np.ndarray, n_classes: int) -> np.ndarray:
    y = np.asarray(y, dtype=np.int64)
    if y.size and (y.min() < 0 or y.max() >= n_classes):
        raise ValueError(f"labels outside [0, {n_classes})")
    T = np.zeros((y.size, n_classes))
    T[np.arange(y.size), y] = 1.0
    return T


def cross_entropy(outputs: np.ndarray, targets: np.ndarray) -> float:
    """Log loss summed over examples, natural log, probabilities clamped."""
    outputs = np.atleast_2d(outputs)
    targets = np.atleast_2d(targets)
    if outputs.shape != targets.shape:
        raise ValueError(f"shape mismatch: outputs {outputs.shape}, targets {targets.shape}")
    return float(-(targets * np.log(np.clip(outputs, PROB_FLOOR, 1.0))).sum())


def loss_and_gradient(
    shape: MLPShape, w: np.ndarray, X: np.ndarray, T: np.ndarray
) -> tuple[float, np.ndarray]:
    """Summed cross-entropy and its exact gradient in flat-vector layout.

    The softmax/cross-entropy pairing makes the output-layer delta O - T.
    """
    W1, b1, W2, b2 = unpack_weights(shape, w)
    H, O = _forward_parts(shape, w, X)
    loss = cross_entropy(O, T)
    delta_out = O - T
    grad_W2 = delta_out.T @ H
    grad_b2 = delta_out.sum(axis=0)
    delta_hidden = (delta_out @ W2) * (1.0 - H**2)
    grad_W1 = delta_hidden.T @ X
    grad_b1 = delta_hidden.sum(axis=0)
    return loss, np.concatenate([grad_W1.ravel(), grad_b1, grad_W2.ravel(), grad_b2])


def scg_train(
    config: MLPConfig,
    train: tuple[np.ndarray, np.ndarray],
    validation: tuple[np.ndarray, np.ndarray],
    n_classes: int,
) -> tuple[MLPModel, float]:
    """Train one network; returns (model, its validation cross-entropy).

    Full-batch SCG on the training cross-entropy. Validation loss is checked
    after every accepted step and the best weights seen are restored at the
    end. Stops at max_epochs, after `patience` epochs without improvement, or
    when the optimizer cannot make further progress.
    """
    X_train, y_train = (np.asarray(a) for a in train)
    X_val, y_val = (np.asarray(a) for a in validation)
    if X_train.shape[0] == 0 or X_val.shape[0] == 0:
        raise ValueError("train and validation sets must be nonempty")
    shape = MLPShape(X_train.shape[1], config.hidden_units, n_classes)
    T_train = one_hot(y_train, n_classes)
    T_val = one_hot(y_val, n_classes)

    w = init_weights(shape, np.random.default_rng(config.seed))
    best_w = w.copy()
    best_val = cross_entropy(_forward_parts(shape, w, X_val)[1], T_val)
    epochs_since_best = 0

    def value_and_grad(wv):
        return loss_and_gradient(shape, wv, X_train, T_train)

    steps = scg_steps(value_and_grad, w, max_iters=config.max_epochs)
    epoch = 0
    while epoch < config.max_epochs and epochs_since_best < config.patience:
        try:
            step = next(steps, None)
        except FloatingPointError:
            raise TrainingDivergedError(epoch) from None
        if step is None:
            break
        epoch = step.iteration
        if not np.isfinite(step.value):
            raise TrainingDivergedError(epoch)
        if step.updated:
            val_ce = cross_entropy(_forward_parts(shape, step.weights, X_val)[1], T_val)
            if val_ce < best_val:
                best_val = val_ce
                best_w = step.weights.copy()
                epochs_since_best = 0
            else:
                epochs_since_best += 1
        else:
            epochs_since_best += 1

    return MLPModel(shape, best_w), best_val


def train_with_restarts(
    config: MLPConfig, X: np.ndarray, y: np.ndarray, n_classes: int
) -> MLPModel:
    """Full training session: one validation split, several restarts.

    Carves a seeded validation split out of (X, y), trains `num_restarts`
    networks from independent random initializations, and returns the one
    with the lowest validation cross-entropy.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n = X.shape[0]
    n_val = round_half_up(config.validation_fraction * n)
    if n < 2 or n_val < 1 or n - n_val < 1:
        raise ValueError(f"cannot carve a validation split from {n} examples")
    order = rng_from(config.seed, TAG_VAL_SPLIT).permutation(n)
    val_idx, fit_idx = order[:n_val], order[n_val:]
    fit_set = (X[fit_idx], y[fit_idx])
    val_set = (X[val_idx], y[val_idx])

    best: tuple[float, MLPModel] | None = None
    failures: list[TrainingDivergedError] = []
    for restart in range(config.num_restarts):
        cfg = replace(config, seed=derive_seed(config.seed, TAG_RESTART, restart))
        try:
            model, val_ce = scg_train(cfg, fit_set, val_set, n_classes)
        except TrainingDivergedError as err:
            failures.append(err)
            continue
        if best is None or val_ce < best[0]:
            best = (val_ce, model)
    if best is None:
        raise TrainingFailedError(
            f"all {config.num_restarts} restarts diverged "
            f"(epochs: {[f.epoch for f in failures]})"
        )
    return best[1]


class SoftmaxMLPClassifier(BaseEstimator, ClassifierMixin):
    """Scikit-learn style wrapper around the restart training session.

    Parameters
    ----------
    hidden_units : int
        Size of the single tanh hidden layer.
    n_restarts : int
        Random restarts per fit; the best on the validation split wins.
    validation_fraction : float
        Fraction of the fit data held out for early stopping.
    max_epochs, patience : int
        Optimizer budget and early-stopping tolerance.
    standardize : bool
        Shift/scale attributes to zero mean, unit std before training
        (statistics are refitted on every call to `fit`).
    random_state : int
        Root seed; fitting is fully deterministic given it.
    """

    def __init__(
        self,
        hidden_units: int = 5,
        n_restarts: int = 3,
        validation_fraction: float = 0.30,
        max_epochs: int = 200,
        patience: int = 20,
        standardize: bool = True,
        random_state: int = 0,
    ):
        self.hidden_units = hidden_units
        self.n_restarts = n_restarts
        self.validation_fraction = validation_fraction
        self.max_epochs = max_epochs
        self.patience = patience
        self.standardize = standardize
        self.random_state = random_state

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
        self.scaler_ = Standardizer.fit(X) if self.standardize else None
        X_fit = self.scaler_.transform(X) if self.scaler_ is not None else X
        self.model_ = train_with_restarts(self._config(), X_fit, y_indices, len(self.classes_))
        self.n_features_in_ = X.shape[1]
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X)
        if self.scaler_ is not None:
            X = self.scaler_.transform(X)
        return forward(self.model_, X)

    def predict(self, X):
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]
