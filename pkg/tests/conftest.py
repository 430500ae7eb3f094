import numpy as np
import pytest

from vennpredict.data import Dataset


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def separable_toy(n_per_side: int = 20, seed: int = 7, margin: float = 0.5) -> Dataset:
    """Two classes split by the sign of the first attribute, with a clear margin."""
    rng = np.random.default_rng(seed)
    x1 = np.concatenate([
        rng.uniform(margin, 1.5, size=n_per_side),
        rng.uniform(-1.5, -margin, size=n_per_side),
    ])
    x2 = rng.uniform(-1.0, 1.0, size=2 * n_per_side)
    y = (x1 < 0).astype(int)
    order = rng.permutation(2 * n_per_side)
    return Dataset(np.column_stack([x1, x2])[order], y[order], ("pos", "neg"))
