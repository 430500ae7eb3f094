"""Taxonomy rules mapping a network output vector to a category key.

Five rules are supported:

* ``v1`` -- the class with the maximum output (c categories).
* ``v2`` -- v1 key plus whether the maximum output reaches theta (2c).
* ``v3`` -- v1 key plus whether the second-highest output reaches theta (2c).
* ``v4`` -- v1 key plus whether the gap between the two highest outputs
  reaches theta (2c).
* ``v5`` -- the set of classes whose outputs reach theta (up to 2^c,
  including the empty set).

Threshold comparisons are closed (``>= theta`` counts as above) with a 1e-9
tie tolerance, so scores that equal theta in exact arithmetic stay above it
despite float rounding (e.g. a 0.7 - 0.2 gap against theta 0.5). Argmax ties
break toward the lowest class index. Keys are hashable tuples; use
``key_to_str`` for the stable text form used in reports.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TAXONOMY_KINDS = ("v1", "v2", "v3", "v4", "v5")

DEFAULT_THETA = {"v1": None, "v2": 0.75, "v3": 0.25, "v4": 0.5, "v5": 0.25}

_PROB_SUM_TOL = 1e-6
_TIE_TOL = 1e-9

CategoryKey = tuple


@dataclass(frozen=True)
class TaxonomyRule:
    """One of the five rules with its threshold (resolved to the default if None)."""

    kind: str
    theta: float | None = None

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in TAXONOMY_KINDS:
            raise ValueError(f"unknown taxonomy kind {self.kind!r}; expected one of {TAXONOMY_KINDS}")
        theta = self.theta if self.theta is not None else DEFAULT_THETA[kind]
        if kind == "v1":
            theta = None
        elif kind in ("v3", "v5") and not 0.0 < theta < 0.5:
            raise ValueError(f"{kind} threshold must be in (0, 0.5), got {theta}")
        elif kind in ("v2", "v4") and not 0.0 < theta < 1.0:
            raise ValueError(f"{kind} threshold must be in (0, 1), got {theta}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "theta", theta)

    def validate_for(self, n_classes: int) -> None:
        """Checks that only make sense once the class count is known."""
        if self.kind == "v2" and self.theta <= 1.0 / n_classes:
            raise ValueError(
                f"v2 threshold must exceed 1/c = {1.0 / n_classes:.4f}, got {self.theta}"
            )

    def max_categories(self, n_classes: int) -> int:
        if self.kind == "v1":
            return n_classes
        if self.kind == "v5":
            return 2**n_classes
        return 2 * n_classes


def category_of(rule: TaxonomyRule, outputs: np.ndarray) -> CategoryKey:
    """Category key of one output vector under `rule`."""
    o = np.asarray(outputs, dtype=np.float64)
    if o.ndim != 1 or o.size < 2:
        raise ValueError(f"outputs must be a vector of >= 2 probabilities, got shape {o.shape}")
    if o.min() < -1e-12 or abs(o.sum() - 1.0) > _PROB_SUM_TOL:
        raise ValueError(f"outputs are not a probability vector (sum {o.sum():.6f}, min {o.min():.3g})")
    rule.validate_for(o.size)

    if rule.kind == "v5":
        return ("v5", tuple(int(j) for j in np.flatnonzero(o >= rule.theta - _TIE_TOL)))

    top = int(np.argmax(o))
    if rule.kind == "v1":
        return ("v1", top)
    if rule.kind == "v2":
        score = o[top]
    elif rule.kind == "v3":
        score = np.partition(o, -2)[-2]
    else:  # v4
        second = np.partition(o, -2)[-2]
        score = o[top] - second
    return (rule.kind, top, bool(score >= rule.theta - _TIE_TOL))


def key_to_str(key: CategoryKey) -> str:
    """Stable text form, e.g. "V1:2", "V2:1+", "V5:{0,1}"."""
    kind = key[0].upper()
    if key[0] == "v1":
        return f"{kind}:{key[1]}"
    if key[0] == "v5":
        return f"{kind}:{{{','.join(str(j) for j in key[1])}}}"
    return f"{kind}:{key[1]}{'+' if key[2] else '-'}"
