"""Deterministic seed derivation.

Every source of randomness in the library flows from a single root seed.
Child seeds are derived from the root plus a path of small integer tags, so
independent components (validation splits, restarts, per-candidate trainings,
stream shuffles) get decorrelated, reproducible generators.
"""

from __future__ import annotations

import numpy as np

# Path tags namespacing the seed tree. Values are arbitrary but frozen:
# changing them changes every derived random stream.
TAG_VAL_SPLIT = 11
TAG_RESTART = 12
TAG_STREAM = 21
TAG_ONLINE_VENN = 22
TAG_ONLINE_NN = 23
TAG_PREDICT = 24
TAG_SPLIT = 31
TAG_BATCH_NN = 32
TAG_BATCH_VENN = 33
TAG_STANDIN = 41


def derive_seed(root: int, *path: int) -> int:
    """Derive a child seed from a root seed and a path of integer tags."""
    entries = [int(root), *[int(p) for p in path]]
    if any(e < 0 for e in entries):
        raise ValueError(f"seeds and path tags must be non-negative, got {entries}")
    return int(np.random.SeedSequence(entries).generate_state(1, dtype=np.uint64)[0])


def rng_from(root: int, *path: int) -> np.random.Generator:
    """Generator seeded by `derive_seed(root, *path)`."""
    return np.random.default_rng(derive_seed(root, *path))
