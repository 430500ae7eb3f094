"""Dataset loading, normalization, splitting, and online streaming.

Datasets are immutable once constructed: attribute matrix `X` (float64),
integer label vector `y`, and the label names in first-appearance order.
All split/stream operations are pure functions of (dataset, seed).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from .seeding import TAG_SPLIT, rng_from


class DataFormatError(ValueError):
    """Raised for malformed dataset files (message names the offending row)."""


@dataclass(frozen=True)
class Dataset:
    """A classification dataset: real attribute vectors with integer labels."""

    X: np.ndarray
    y: np.ndarray
    class_names: tuple[str, ...]

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.int64)
        if X.ndim != 2 or X.shape[1] < 1:
            raise ValueError(f"X must be 2-D with at least one attribute, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise ValueError(f"y shape {y.shape} does not match {X.shape[0]} examples")
        c = len(self.class_names)
        if c < 2:
            raise ValueError(f"need at least 2 classes, got {c}")
        if y.size and (y.min() < 0 or y.max() >= c):
            raise ValueError(f"labels must lie in [0, {c}), got range [{y.min()}, {y.max()}]")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "class_names", tuple(str(n) for n in self.class_names))

    @property
    def n_examples(self) -> int:
        return self.X.shape[0]

    @property
    def n_attributes(self) -> int:
        return self.X.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.y, minlength=self.n_classes)

    def subset(self, indices) -> "Dataset":
        indices = np.asarray(indices)
        return Dataset(self.X[indices], self.y[indices], self.class_names)

    def head(self, n: int) -> "Dataset":
        return Dataset(self.X[:n], self.y[:n], self.class_names)


def load_csv(path, has_header: bool = False) -> Dataset:
    """Load a comma-separated dataset: attribute columns, label last.

    Labels (strings or numbers) are mapped to class indices in order of first
    appearance. Every row must have the same column count as the first data
    row; non-numeric attributes raise `DataFormatError` naming the row.
    """
    path = Path(path)
    rows: list[tuple[int, list[str]]] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        for line_no, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            rows.append((line_no, row))
    if has_header and rows:
        rows = rows[1:]
    if not rows:
        raise DataFormatError(f"{path}: no data rows")

    first_line, first_row = rows[0]
    n_columns = len(first_row)
    if n_columns < 2:
        raise DataFormatError(
            f"{path}: row {first_line} has {n_columns} column(s); need attributes plus a label"
        )

    attributes = np.empty((len(rows), n_columns - 1), dtype=np.float64)
    label_index: dict[str, int] = {}
    labels = np.empty(len(rows), dtype=np.int64)
    for i, (line_no, row) in enumerate(rows):
        if len(row) != n_columns:
            raise DataFormatError(
                f"{path}: row {line_no} has {len(row)} columns, expected {n_columns}"
            )
        for j, cell in enumerate(row[:-1]):
            try:
                attributes[i, j] = float(cell)
            except ValueError:
                raise DataFormatError(
                    f"{path}: row {line_no}, column {j + 1}: non-numeric attribute {cell!r}"
                ) from None
        name = row[-1].strip()
        if name not in label_index:
            label_index[name] = len(label_index)
        labels[i] = label_index[name]

    if len(label_index) < 2:
        raise DataFormatError(f"{path}: found a single class {list(label_index)!r}; need at least 2")
    return Dataset(attributes, labels, tuple(label_index))


def save_csv(dataset: Dataset, path) -> None:
    """Write a dataset in the same comma-separated form `load_csv` reads."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        for row, label in zip(dataset.X, dataset.y):
            writer.writerow([format(v, ".10g") for v in row] + [dataset.class_names[label]])


@dataclass(frozen=True)
class Standardizer:
    """Per-attribute shift/scale making the fitted data zero-mean, unit-std.

    Population standard deviation (divide by n). Attributes that are constant
    on the fitted data keep std 1 so they map to a constant 0 instead of
    dividing by zero.
    """

    means: np.ndarray
    std_devs: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardizer":
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] == 0:
            raise ValueError("need a nonempty 2-D attribute matrix")
        means = X.mean(axis=0)
        std_devs = X.std(axis=0)
        std_devs = np.where(std_devs == 0.0, 1.0, std_devs)
        return cls(means=means, std_devs=std_devs)

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.means.shape[0]:
            raise ValueError(
                f"attribute count {X.shape[-1]} does not match fitted count {self.means.shape[0]}"
            )
        return (X - self.means) / self.std_devs

    def inverse_transform(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) * self.std_devs + self.means


@dataclass(frozen=True)
class SplitPlan:
    """Repeated random train/test divisions (e.g. ten 90/10 splits)."""

    seed: int
    test_fraction: float = 0.10
    num_repeats: int = 10

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError(f"test_fraction must be in (0, 1), got {self.test_fraction}")
        if self.num_repeats < 1:
            raise ValueError(f"num_repeats must be >= 1, got {self.num_repeats}")


def round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def split(dataset: Dataset, plan: SplitPlan, repeat_index: int) -> tuple[Dataset, Dataset]:
    """Deterministic disjoint train/test division for one repeat.

    Test size is round(test_fraction * n), ties rounding up. Repeats with the
    same (seed, repeat_index) always produce the same partition.
    """
    if not 0 <= repeat_index < plan.num_repeats:
        raise ValueError(f"repeat_index {repeat_index} outside [0, {plan.num_repeats})")
    n = dataset.n_examples
    n_test = round_half_up(plan.test_fraction * n)
    if n_test == 0 or n_test == n:
        raise ValueError(
            f"test_fraction {plan.test_fraction} yields an empty train or test set for n={n}"
        )
    order = rng_from(plan.seed, TAG_SPLIT, repeat_index).permutation(n)
    test_idx = np.sort(order[:n_test])
    train_idx = np.sort(order[n_test:])
    return dataset.subset(train_idx), dataset.subset(test_idx)


def shuffle_dataset(dataset: Dataset, seed: int) -> Dataset:
    """Seed-controlled reordering of the examples (used once before streaming)."""
    order = np.random.default_rng(seed).permutation(dataset.n_examples)
    return dataset.subset(order)


@dataclass(frozen=True)
class OnlineStep:
    """One step of the online protocol: everything seen so far plus the next example."""

    step: int  # 1-based index among prediction steps
    train: Dataset
    x: np.ndarray
    y: int


def online_stream(dataset: Dataset, initial_size: int) -> Iterator[OnlineStep]:
    """Yield prediction steps in dataset order.

    Step i presents the first `initial_size + i - 1` examples as training
    data and example `initial_size + i` as the one to predict; the caller's
    loop implicitly reveals its true label by moving to the next step.
    """
    n = dataset.n_examples
    if not 0 < initial_size < n:
        raise ValueError(f"initial_size must be in (0, {n}), got {initial_size}")
    for step, position in enumerate(range(initial_size, n), start=1):
        yield OnlineStep(
            step=step,
            train=dataset.head(position),
            x=dataset.X[position],
            y=int(dataset.y[position]),
        )
