"""Scaled conjugate gradient minimization (Moller's method).

A full-batch, Hessian-free conjugate gradient variant: curvature along the
search direction is estimated from a finite difference of gradients and kept
positive by a Levenberg-Marquardt style damping term, so no line search is
needed. Iterations either accept a step that reduces the objective or raise
the damping and retry; the accepted objective values are non-increasing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

ValueAndGrad = Callable[[np.ndarray], tuple[float, np.ndarray]]

# Published defaults for the curvature probe and initial damping.
SIGMA = 1e-4
LAMBDA_INIT = 1e-6

_LAMBDA_MAX = 1e20
_TINY = 1e-300


@dataclass(frozen=True)
class SCGStep:
    """State after one iteration; `updated` is False for rejected steps."""

    iteration: int
    weights: np.ndarray
    value: float
    updated: bool
    grad_norm: float


def scg_steps(
    value_and_grad: ValueAndGrad,
    w0: np.ndarray,
    max_iters: int,
    grad_tol: float = 1e-10,
) -> Iterator[SCGStep]:
    """Iterate scaled conjugate gradient from `w0`, yielding after every step.

    The direction set is restarted to steepest descent every `len(w0)`
    iterations. Stops early once the gradient norm falls below `grad_tol`,
    the search direction collapses, or the damping grows past the point
    where progress is representable.
    """
    w = np.array(w0, dtype=np.float64)
    n = w.size
    value, grad = value_and_grad(w)
    if not np.isfinite(value):
        raise FloatingPointError("objective is non-finite at the initial point")
    r = -grad
    p = r.copy()
    lam = LAMBDA_INIT
    lam_bar = 0.0
    success = True
    delta2 = 0.0  # raw curvature p'Hp, refreshed after each accepted step
    p_norm2 = float(p @ p)

    for iteration in range(1, max_iters + 1):
        if success:
            p_norm2 = float(p @ p)
            if p_norm2 < _TINY:
                return
            sigma_k = SIGMA / np.sqrt(p_norm2)
            _, grad_probe = value_and_grad(w + sigma_k * p)
            s = (grad_probe - (-r)) / sigma_k
            delta2 = float(p @ s)

        # Damped curvature; force it positive when the raw estimate is not.
        delta = delta2 + (lam - lam_bar) * p_norm2
        if delta <= 0:
            lam_bar = 2.0 * (lam - delta / p_norm2)
            delta = -delta + lam * p_norm2
            lam = lam_bar

        mu = float(p @ r)
        if mu <= 0:
            # Conjugacy has degraded; restart from steepest descent.
            p = r.copy()
            success = True
            continue
        alpha = mu / delta
        trial_value, trial_grad = value_and_grad(w + alpha * p)

        if np.isfinite(trial_value):
            comparison = 2.0 * delta * (value - trial_value) / mu**2
        else:
            comparison = -np.inf  # reject and raise damping hard

        if comparison >= 0:
            w = w + alpha * p
            value = trial_value
            r_new = -trial_grad
            lam_bar = 0.0
            success = True
            if iteration % n == 0:
                p = r_new.copy()
            else:
                beta = float(r_new @ r_new - r_new @ r) / mu
                p = r_new + beta * p
            r = r_new
            if comparison >= 0.75:
                lam *= 0.25
            updated = True
        else:
            lam_bar = lam
            success = False
            updated = False

        if comparison < 0.25:
            if np.isfinite(comparison):
                lam += delta * (1.0 - comparison) / p_norm2
            else:
                lam = max(lam * 10.0, LAMBDA_INIT)

        grad_norm = float(np.linalg.norm(r))
        yield SCGStep(iteration, w, value, updated, grad_norm)

        if grad_norm < grad_tol or lam > _LAMBDA_MAX:
            return


def scg_minimize(
    value_and_grad: ValueAndGrad,
    w0: np.ndarray,
    max_iters: int = 200,
    grad_tol: float = 1e-10,
) -> tuple[np.ndarray, float, int]:
    """Run SCG to completion; returns (weights, value, iterations used)."""
    w = np.array(w0, dtype=np.float64)
    value, _ = value_and_grad(w)
    iterations = 0
    for step in scg_steps(value_and_grad, w0, max_iters, grad_tol):
        iterations = step.iteration
        if step.updated:
            w = step.weights
            value = step.value
    return w, value, iterations
