"""Online calibration runs and batch quality-metric comparisons.

Online protocol: starting from an initial training set, each remaining
example is predicted and then revealed, growing the training set. For the
Venn predictor the run records cumulative errors together with cumulative
lower/upper error-probability curves; calibration shows as the error curve
staying between the probability curves. For the plain network it records the
single cumulative error-probability curve, whose gap from the error curve is
scored by a two-sided p-value.

Batch protocol: repeated random train/test divisions, pooling every test set,
scored by accuracy, summed cross-entropy, Brier score, and the reliability
term of the Brier decomposition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np
from joblib import Parallel, delayed

from .data import Dataset, SplitPlan, Standardizer, online_stream, shuffle_dataset, split
from .mlp import MLPConfig, cross_entropy, forward, one_hot, train_with_restarts
from .seeding import (
    TAG_BATCH_NN,
    TAG_BATCH_VENN,
    TAG_ONLINE_NN,
    TAG_ONLINE_VENN,
    TAG_STREAM,
    derive_seed,
)
from .taxonomy import TaxonomyRule
from .venn import aggregate, multiprobability_from_outputs, transduce


@dataclass(frozen=True)
class OnlineVennResult:
    """Cumulative curves of one online Venn run (arrays indexed by step - 1)."""

    errors: np.ndarray
    lower_error_prob: np.ndarray
    upper_error_prob: np.ndarray
    subsampled: bool

    @property
    def n_steps(self) -> int:
        return len(self.errors)

    @property
    def contained(self) -> bool:
        """Final error count inside the final [lower, upper] error-probability band."""
        return bool(
            self.lower_error_prob[-1] <= self.errors[-1] <= self.upper_error_prob[-1]
        )


@dataclass(frozen=True)
class OnlineBaselineResult:
    """Cumulative curves of one online plain-network run."""

    errors: np.ndarray
    error_prob: np.ndarray
    step_error_probs: np.ndarray  # per-step 1 - max output, not accumulated
    subsampled: bool

    @property
    def n_steps(self) -> int:
        return len(self.errors)

    def pvalue(self) -> "PValueResult":
        return two_sided_pvalue(int(self.errors[-1]), self.step_error_probs)


def _stream_dataset(dataset, config, initial_size, max_steps):
    shuffled = shuffle_dataset(dataset, derive_seed(config.seed, TAG_STREAM))
    total_steps = dataset.n_examples - initial_size
    if total_steps < 1:
        raise ValueError(f"initial_size {initial_size} leaves no examples to predict")
    subsampled = max_steps is not None and max_steps < total_steps
    if subsampled:
        shuffled = shuffled.head(initial_size + max_steps)
    return shuffled, subsampled


def run_online_venn(
    dataset: Dataset,
    rules: Sequence[TaxonomyRule],
    config: MLPConfig,
    initial_size: int = 50,
    max_steps: int | None = None,
    n_jobs: int = 1,
) -> dict[str, OnlineVennResult]:
    """Online Venn run; returns one set of curves per taxonomy rule.

    The candidate-label networks depend only on the data stream, so all
    rules share the same per-step trainings; running one rule or five gives
    identical curves for each. The stream order is a seed-controlled shuffle
    of the dataset. `max_steps` truncates the stream (a labeled subsample)
    to bound the otherwise quadratic retraining cost.
    """
    for rule in rules:
        rule.validate_for(dataset.n_classes)
    stream, subsampled = _stream_dataset(dataset, config, initial_size, max_steps)

    sums = {rule.kind: {"err": [], "lep": [], "uep": []} for rule in rules}
    for step in online_stream(stream, initial_size):
        outputs = transduce(
            step.train, step.x, config, seed_path=(TAG_ONLINE_VENN, step.step), n_jobs=n_jobs
        )
        for rule in rules:
            P = multiprobability_from_outputs(outputs, step.train.y, rule)
            result = aggregate(P)
            acc = sums[rule.kind]
            acc["err"].append(1 if result.predicted != step.y else 0)
            lo_err, hi_err = result.error_interval
            acc["lep"].append(lo_err)
            acc["uep"].append(hi_err)

    return {
        kind: OnlineVennResult(
            errors=np.cumsum(acc["err"]),
            lower_error_prob=np.cumsum(acc["lep"]),
            upper_error_prob=np.cumsum(acc["uep"]),
            subsampled=subsampled,
        )
        for kind, acc in sums.items()
    }


def run_online_nn(
    dataset: Dataset,
    config: MLPConfig,
    initial_size: int = 50,
    max_steps: int | None = None,
) -> OnlineBaselineResult:
    """Online run of the plain network under the same protocol and stream."""
    stream, subsampled = _stream_dataset(dataset, config, initial_size, max_steps)
    c = dataset.n_classes

    errs, probs = [], []
    for step in online_stream(stream, initial_size):
        scaler = Standardizer.fit(step.train.X)
        cfg = replace(config, seed=derive_seed(config.seed, TAG_ONLINE_NN, step.step))
        model = train_with_restarts(cfg, scaler.transform(step.train.X), step.train.y, c)
        output = forward(model, scaler.transform(step.x))[0]
        errs.append(1 if int(np.argmax(output)) != step.y else 0)
        probs.append(1.0 - float(output.max()))

    return OnlineBaselineResult(
        errors=np.cumsum(errs),
        error_prob=np.cumsum(probs),
        step_error_probs=np.array(probs),
        subsampled=subsampled,
    )


class PValueResult(NamedTuple):
    pvalue: float
    degenerate: bool


def two_sided_pvalue(n_errors: float, error_probs: np.ndarray) -> PValueResult:
    """Two-sided p-value for the observed error count given per-step probabilities.

    Step errors are treated as independent Bernoulli draws with the given
    probabilities; the deviation of the total from its expectation is scored
    by a normal approximation with continuity correction. A zero-variance
    sequence that still deviates is reported as (0, degenerate).
    """
    q = np.asarray(error_probs, dtype=np.float64)
    if q.size == 0 or q.min() < 0.0 or q.max() > 1.0:
        raise ValueError("error probabilities must be a nonempty sequence in [0, 1]")
    mean = float(q.sum())
    var = float((q * (1.0 - q)).sum())
    if var == 0.0:
        if n_errors == mean:
            return PValueResult(1.0, False)
        return PValueResult(0.0, True)
    z = (abs(n_errors - mean) - 0.5) / math.sqrt(var)
    return PValueResult(min(1.0, math.erfc(z / math.sqrt(2.0))), False)


@dataclass(frozen=True)
class BatchMetrics:
    """Quality metrics of one probabilistic classifier on a pooled test set."""

    accuracy: float
    cross_entropy: float
    brier: float
    reliability: float

    def as_dict(self) -> dict[str, float]:
        return {
            "accuracy": self.accuracy,
            "cross_entropy": self.cross_entropy,
            "brier": self.brier,
            "reliability": self.reliability,
        }


def brier_score(probs: np.ndarray, targets: np.ndarray) -> float:
    """Mean over examples of the squared error summed over classes."""
    probs = np.atleast_2d(probs)
    targets = np.atleast_2d(targets)
    if probs.shape != targets.shape:
        raise ValueError(f"shape mismatch: {probs.shape} vs {targets.shape}")
    return float(((probs - targets) ** 2).sum() / probs.shape[0])


def reliability(probs: np.ndarray, indicators: np.ndarray, n_bins: int) -> float:
    """Calibration term of the Brier decomposition over equal-width bins.

    Every output of every example lands in one of `n_bins` bins of [0, 1];
    each bin is represented by its midpoint and penalized by its squared
    distance from the fraction of member outputs whose class indicator is 1.
    Normalized by the number of examples (rows), not outputs.
    """
    probs = np.asarray(probs, dtype=np.float64)
    indicators = np.asarray(indicators, dtype=np.float64)
    if probs.ndim != 2 or probs.shape != indicators.shape:
        raise ValueError(f"need matching 2-D arrays, got {probs.shape} and {indicators.shape}")
    if n_bins < 1:
        raise ValueError(f"n_bins must be >= 1, got {n_bins}")
    if probs.min() < 0.0 or probs.max() > 1.0:
        raise ValueError("outputs must lie in [0, 1]")

    flat_p = probs.ravel()
    flat_t = indicators.ravel()
    bins = np.minimum((flat_p * n_bins).astype(np.int64), n_bins - 1)
    counts = np.bincount(bins, minlength=n_bins)
    hits = np.bincount(bins, weights=flat_t, minlength=n_bins)
    occupied = counts > 0
    midpoints = (np.arange(n_bins) + 0.5) / n_bins
    frequencies = hits[occupied] / counts[occupied]
    penalties = counts[occupied] * (midpoints[occupied] - frequencies) ** 2
    return float(penalties.sum() / probs.shape[0])


def evaluate_probabilistic(
    probs: np.ndarray, y_true: np.ndarray, n_classes: int, n_bins: int
) -> BatchMetrics:
    """All four batch metrics for one block of probabilistic outputs."""
    probs = np.atleast_2d(probs)
    y_true = np.asarray(y_true, dtype=np.int64)
    targets = one_hot(y_true, n_classes)
    correct = int((np.argmax(probs, axis=1) == y_true).sum())
    return BatchMetrics(
        accuracy=correct / len(y_true),
        cross_entropy=cross_entropy(probs, targets),
        brier=brier_score(probs, targets),
        reliability=reliability(probs, targets, n_bins),
    )


@dataclass(frozen=True)
class BatchReport:
    """Pooled metrics per method; "nn" is the plain network baseline."""

    methods: dict[str, BatchMetrics]
    n_pooled: int
    n_bins: int

    def as_dict(self) -> dict:
        return {
            "n_pooled": self.n_pooled,
            "n_bins": self.n_bins,
            "methods": {name: m.as_dict() for name, m in self.methods.items()},
        }


def _venn_mean_probs(train, x, config, seed_path, rules):
    """Mean probability vector per rule for one test example (shared trainings)."""
    outputs = transduce(train, x, config, seed_path=seed_path)
    return [
        aggregate(multiprobability_from_outputs(outputs, train.y, rule)).mean_probs
        for rule in rules
    ]


def run_batch(
    dataset: Dataset,
    rules: Sequence[TaxonomyRule],
    config: MLPConfig,
    plan: SplitPlan,
    n_bins: int = 100,
    n_jobs: int = 1,
) -> BatchReport:
    """Baseline network and Venn predictors over repeated random divisions.

    Each repeat trains the baseline on the train split and runs the Venn
    predictor on every test example (its mean probabilities are the
    probabilistic output). Metrics are computed once over the union of all
    test sets rather than averaged per split.
    """
    for rule in rules:
        rule.validate_for(dataset.n_classes)
    c = dataset.n_classes

    y_pooled: list[np.ndarray] = []
    nn_probs: list[np.ndarray] = []
    venn_probs: dict[str, list[np.ndarray]] = {rule.kind: [] for rule in rules}

    for repeat in range(plan.num_repeats):
        train, test = split(dataset, plan, repeat)
        y_pooled.append(test.y)

        scaler = Standardizer.fit(train.X)
        nn_cfg = replace(config, seed=derive_seed(config.seed, TAG_BATCH_NN, repeat))
        model = train_with_restarts(nn_cfg, scaler.transform(train.X), train.y, c)
        nn_probs.append(forward(model, scaler.transform(test.X)))

        tasks = (
            delayed(_venn_mean_probs)(
                train, test.X[i], config, (TAG_BATCH_VENN, repeat, i), rules
            )
            for i in range(test.n_examples)
        )
        per_example = Parallel(n_jobs=n_jobs)(tasks)
        for r, rule in enumerate(rules):
            venn_probs[rule.kind].append(np.array([row[r] for row in per_example]))

    y_all = np.concatenate(y_pooled)
    methods = {"nn": evaluate_probabilistic(np.vstack(nn_probs), y_all, c, n_bins)}
    for rule in rules:
        methods[rule.kind] = evaluate_probabilistic(
            np.vstack(venn_probs[rule.kind]), y_all, c, n_bins
        )
    return BatchReport(methods=methods, n_pooled=len(y_all), n_bins=n_bins)
