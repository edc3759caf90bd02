"""Box-constrained quasi-Newton local search with finite-difference gradients.

Damped BFGS model, projected-gradient QP step, Armijo backtracking. Stands in
wherever a smooth local polish is wanted from a warm start.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .problem import (
    Bounds,
    BudgetExhausted,
    EvalCounter,
    NonFiniteValueError,
    Problem,
    evaluate_counted,
)


@dataclass
class LocalConfig:
    grad_step: float = 1e-7       # relative finite-difference step
    max_iters: int = 200
    pg_tol: float = 1e-8          # projected-gradient stationarity tolerance
    armijo_c: float = 1e-4
    max_backtracks: int = 30
    qp_iters: int = 50

    def __post_init__(self):
        if self.grad_step <= 0 or self.pg_tol <= 0:
            raise ValueError("grad_step and pg_tol must be positive")
        if not 0.0 < self.armijo_c < 1.0:
            raise ValueError("armijo_c must lie in (0, 1)")


class LocalStatus(str, Enum):
    STATIONARY = "stationary"
    ITER_CAP = "iter_cap"
    BUDGET_EXHAUSTED = "budget_exhausted"
    LINE_SEARCH_FAILURE = "line_search_failure"


@dataclass
class LocalResult:
    x: np.ndarray
    f: float
    iterations: int
    status: LocalStatus
    evals: int = 0
    trace: list = field(default_factory=list)  # (evals, f_best)


def fd_gradient(problem: Problem, x: np.ndarray, counter: EvalCounter,
                grad_step: float = 1e-7,
                f0: Optional[float] = None) -> np.ndarray:
    """One-sided finite differences, n extra evaluations.

    Forward step h_i = grad_step*max(1, |x_i|); switches to backward when the
    forward probe would leave the upper bound.
    """
    x = np.asarray(x, dtype=float)
    if f0 is None:
        f0 = evaluate_counted(problem, x, counter)
    bounds = problem.bounds
    g = np.empty_like(x)
    for i in range(x.size):
        h = grad_step * max(1.0, abs(x[i]))
        if x[i] + h > bounds.upper[i]:
            h = -h
        xi = x.copy()
        xi[i] += h
        g[i] = (evaluate_counted(problem, xi, counter) - f0) / h
    return g


def box_qp_step(g: np.ndarray, B: np.ndarray, x: np.ndarray, bounds: Bounds,
                iters: int = 50) -> np.ndarray:
    """Approximately minimize g.p + 0.5 p'Bp over lower <= x+p <= upper.

    Projected gradient with a fixed step 1/L (L = largest eigenvalue of B)
    starting from p = 0; every iterate is feasible and the QP objective never
    rises above 0.
    """
    lo = bounds.lower - x
    hi = bounds.upper - x
    L = float(np.linalg.eigvalsh(B)[-1])
    if L <= 0:
        return np.zeros_like(g)
    step = 1.0 / L
    p = np.zeros_like(g)
    for _ in range(iters):
        p = np.clip(p - step * (g + B @ p), lo, hi)
    if g @ p + 0.5 * p @ B @ p > 0.0:
        return np.zeros_like(g)
    return p


def _projected_gradient_norm(x, g, bounds):
    return float(np.abs(np.clip(x - g, bounds.lower, bounds.upper) - x).max())


def sqp_local(problem: Problem, x0: np.ndarray, config: LocalConfig,
              counter: Optional[EvalCounter] = None) -> LocalResult:
    """Quasi-Newton descent from x0; returns the best point seen.

    Powell-damped BFGS keeps the model positive definite; non-finite values
    during probing are treated as a rejected step, never a crash.
    """
    counter = counter if counter is not None else EvalCounter()
    bounds = problem.bounds
    x = bounds.clip(np.asarray(x0, dtype=float))
    n = x.size
    start_count = counter.count

    def spent():
        return counter.count - start_count

    trace = []
    try:
        f = evaluate_counted(problem, x, counter)
    except BudgetExhausted:
        return LocalResult(x, np.inf, 0, LocalStatus.BUDGET_EXHAUSTED, 0, trace)
    best_x, best_f = x.copy(), f
    trace.append((spent(), best_f))
    B = np.eye(n)
    status = LocalStatus.ITER_CAP
    it = 0

    try:
        g = fd_gradient(problem, x, counter, config.grad_step, f0=f)
        for it in range(1, config.max_iters + 1):
            if _projected_gradient_norm(x, g, bounds) <= config.pg_tol:
                status = LocalStatus.STATIONARY
                break
            p = box_qp_step(g, B, x, bounds, config.qp_iters)
            slope = float(g @ p)
            if not np.any(p) or slope >= 0.0:
                status = LocalStatus.STATIONARY
                break
            alpha = 1.0
            accepted = False
            for _ in range(config.max_backtracks):
                x_new = bounds.clip(x + alpha * p)
                try:
                    f_new = evaluate_counted(problem, x_new, counter)
                except NonFiniteValueError:
                    alpha *= 0.5
                    continue
                if f_new <= f + config.armijo_c * alpha * slope:
                    accepted = True
                    break
                alpha *= 0.5
            if not accepted:
                status = LocalStatus.LINE_SEARCH_FAILURE
                break
            g_new = fd_gradient(problem, x_new, counter, config.grad_step,
                                f0=f_new)
            s = x_new - x
            y = g_new - g
            Bs = B @ s
            sBs = float(s @ Bs)
            sy = float(s @ y)
            if sBs > 0.0:
                if sy < 0.2 * sBs:  # Powell damping
                    theta = 0.8 * sBs / (sBs - sy)
                    y = theta * y + (1.0 - theta) * Bs
                    sy = float(s @ y)
                if sy > 1e-16:
                    B = B - np.outer(Bs, Bs) / sBs + np.outer(y, y) / sy
            x, f, g = x_new, f_new, g_new
            if f < best_f:
                best_x, best_f = x.copy(), f
                trace.append((spent(), best_f))
    except BudgetExhausted:
        status = LocalStatus.BUDGET_EXHAUSTED

    return LocalResult(best_x, best_f, it, status, spent(), trace)
