"""Adaptive block coordinate DIRECT: coordinate-wise DIRECT subproblems,
one quasi-Newton local search on stall, then random-block subproblems.

Phase order is coordinate -> local -> block (local first when `sqp_first`).
The incumbent never worsens; every subproblem routes evaluations through one
shared counter so global budgets are exact.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .direct import DirectConfig, direct_solve
from .local import LocalConfig, LocalStatus, sqp_local
from .problem import (
    Bounds,
    BudgetExhausted,
    ConfigError,
    EvalCounter,
    Problem,
    evaluate_counted,
)


class Phase(str, Enum):
    COORDINATE = "coordinate"
    LOCAL = "local"
    BLOCK = "block"
    DONE = "done"


class CoordMode(str, Enum):
    SEQUENTIAL = "sequential"
    RANDOM = "random"


@dataclass
class AbcdConfig:
    m1: int = 1                     # phase-1 block size
    m2: int = 2                     # phase-3 block size
    t1: int = 3                     # stall patience before the switch
    switch_eps: float = 1e-3        # descent at or below this counts as a stall
    global_stall_eps: float = 1e-6  # phase-3 stall threshold
    target_accuracy: float = 1e-4
    sub_eval_cap: Optional[int] = None   # default 100 * block size
    max_evals: Optional[int] = None
    max_subproblems: Optional[int] = None
    max_seconds: Optional[float] = None
    q: Optional[int] = None         # starting-point samples, default min(2n, 32)
    seed: int = 0
    sqp_first: bool = False
    enable_switch: bool = True
    enable_sqp: bool = True
    restart_on_stall: bool = True   # stall with budget left starts a new cycle
    # per-subproblem DIRECT stops
    sub_min_measure: float = 1e-6
    sub_stall_eps: float = 1e-8
    sub_stall_iters: int = 5
    poh_eps: float = 1e-4
    local: LocalConfig = field(default_factory=LocalConfig)

    def validate(self, n: int) -> None:
        if not (1 <= self.m1 <= n and 1 <= self.m2 <= n):
            raise ConfigError("block sizes must lie in [1, n]")
        if self.t1 < 1 or self.switch_eps <= 0:
            raise ConfigError("t1 >= 1 and switch_eps > 0 required")
        if self.q is not None and self.q < 1:
            raise ConfigError("q must be >= 1")


@dataclass
class AbcdState:
    incumbent_x: np.ndarray
    incumbent_f: float
    phase: Phase
    cursor: int = 0
    stall_streak: int = 0
    subproblem_index: int = 0


@dataclass
class AbcdResult:
    f_min: float
    x_min: np.ndarray
    evals: int
    subproblems: int
    reason: str
    trace: list = field(default_factory=list)  # (evals, subproblem, phase, f)


def choose_start(problem: Problem, q: int, rng: np.random.Generator,
                 counter: EvalCounter) -> tuple[np.ndarray, float]:
    """Optimistic start: split the box into q slabs along the widest dimension,
    sample one uniform point per slab, keep the best (q evaluations)."""
    if q < 1:
        raise ConfigError("q must be >= 1")
    bounds = problem.bounds
    split_dim = int(np.argmax(bounds.width))
    best_x, best_f = None, np.inf
    lo, hi = bounds.lower[split_dim], bounds.upper[split_dim]
    edges = np.linspace(lo, hi, q + 1)
    for k in range(q):
        x = rng.uniform(bounds.lower, bounds.upper)
        x[split_dim] = rng.uniform(edges[k], edges[k + 1])
        f = evaluate_counted(problem, x, counter)
        if f < best_f:
            best_x, best_f = x, f
    return best_x, best_f


def select_coords(state: AbcdState, n: int, size: int, mode: CoordMode,
                  rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Pick the next block of coordinate indices."""
    if not 1 <= size <= n:
        raise ConfigError(f"block size {size} out of range for n={n}")
    if mode is CoordMode.SEQUENTIAL:
        idx = (state.cursor + np.arange(size)) % n
        state.cursor = (state.cursor + size) % n
        return idx
    return np.sort(rng.choice(n, size=size, replace=False))


def make_subproblem(problem: Problem, incumbent_x: np.ndarray,
                    idx: np.ndarray) -> Problem:
    """Restrict the problem to the chosen coordinates, freezing the rest at
    the incumbent. Evaluations still count against the caller's counter."""
    idx = np.asarray(idx, dtype=int)
    frozen = np.array(incumbent_x, dtype=float)

    def objective(y):
        x = frozen.copy()
        x[idx] = y
        return problem.objective(x)

    return Problem(
        objective=objective,
        bounds=Bounds(problem.bounds.lower[idx], problem.bounds.upper[idx]),
        known_optimum=problem.known_optimum,
    )


def stall_update(streak: int, f_prev: float, f_new: float, eps1: float,
                 t1: int) -> tuple[int, bool]:
    """Count consecutive subproblems whose descent is at most eps1; a descent
    of exactly eps1 still counts as a stall."""
    if f_prev - f_new <= eps1:
        streak += 1
    else:
        streak = 0
    return streak, streak >= t1


def abcd_solve(problem: Problem, config: Optional[AbcdConfig] = None,
               counter: Optional[EvalCounter] = None) -> AbcdResult:
    config = config or AbcdConfig()
    n = problem.n
    config.validate(n)
    counter = counter if counter is not None else EvalCounter()
    target = problem.known_optimum
    t_start = time.monotonic()
    start_count = counter.count

    # dedicated streams: phase-3 block draws stay reproducible no matter how
    # many evaluations earlier phases consumed
    ss = np.random.SeedSequence(config.seed)
    start_rng, block_rng = (np.random.default_rng(s) for s in ss.spawn(2))

    trace: list[tuple] = []
    reason = None

    def spent():
        return counter.count - start_count

    q = config.q if config.q is not None else min(2 * n, 32)
    try:
        x0, f0 = choose_start(problem, q, start_rng, counter)
    except BudgetExhausted:
        mid = problem.bounds.lower + 0.5 * problem.bounds.width
        return AbcdResult(np.inf, mid, spent(), 0, "budget", trace)

    state = AbcdState(incumbent_x=x0, incumbent_f=f0, phase=Phase.COORDINATE)
    # the working incumbent may be replaced by a restart; the best pair is
    # monotone and is what the result and trace report
    best_x, best_f = x0.copy(), f0
    trace.append((spent(), 0, Phase.COORDINATE.value, best_f))

    def note_best():
        nonlocal best_x, best_f
        if state.incumbent_f < best_f:
            best_x, best_f = state.incumbent_x.copy(), state.incumbent_f

    def target_hit():
        return (target is not None
                and abs(best_f - target) <= config.target_accuracy)

    def out_of_budget():
        if config.max_evals is not None and spent() >= config.max_evals:
            return True
        if (config.max_subproblems is not None
                and state.subproblem_index >= config.max_subproblems):
            return True
        if (config.max_seconds is not None
                and time.monotonic() - t_start > config.max_seconds):
            return True
        return False

    def classify_budget():
        if config.max_seconds is not None and time.monotonic() - t_start > config.max_seconds:
            return "time_budget"
        if (config.max_subproblems is not None
                and state.subproblem_index >= config.max_subproblems):
            return "subproblem_budget"
        return "eval_budget"

    def run_subproblem(idx, phase, deep=False):
        """One block-restricted DIRECT run; adopt its best into the incumbent.

        A deep run gets a larger evaluation cap and no early stops so it can
        separate near-equal basins the regular stops would merge."""
        sub = make_subproblem(problem, state.incumbent_x, idx)
        cap = config.sub_eval_cap
        cap = cap if cap is not None else 100 * len(idx)
        if deep:
            sub_cfg = DirectConfig(
                poh_eps=config.poh_eps,
                max_evals=5 * cap,
                target_accuracy=config.target_accuracy,
            )
        else:
            sub_cfg = DirectConfig(
                poh_eps=config.poh_eps,
                max_evals=cap,
                target_accuracy=config.target_accuracy,
                min_measure=config.sub_min_measure,
                stall_eps=config.sub_stall_eps,
                stall_iters=config.sub_stall_iters,
            )
        res = direct_solve(sub, sub_cfg, counter=counter)
        state.subproblem_index += 1
        if res.f_min < state.incumbent_f:
            x = state.incumbent_x.copy()
            x[np.asarray(idx, dtype=int)] = res.x_min
            state.incumbent_x = x
            state.incumbent_f = res.f_min
            note_best()
        trace.append((spent(), state.subproblem_index, phase.value, best_f))
        return res.reason

    def run_local():
        state.phase = Phase.LOCAL
        res = sqp_local(problem, state.incumbent_x, config.local, counter)
        if res.f < state.incumbent_f:
            state.incumbent_x = res.x.copy()
            state.incumbent_f = res.f
            note_best()
        trace.append((spent(), state.subproblem_index, Phase.LOCAL.value,
                      best_f))
        return res.status

    def restart() -> bool:
        """Replace the working incumbent with a fresh optimistic draw; the
        global best is kept aside. Returns False on budget exhaustion."""
        nonlocal reason
        try:
            x_new, f_new = choose_start(problem, q, start_rng, counter)
        except BudgetExhausted:
            reason = "eval_budget"
            return False
        state.incumbent_x, state.incumbent_f = x_new, f_new
        note_best()
        state.stall_streak = 0
        state.cursor = 0
        trace.append((spent(), state.subproblem_index,
                      Phase.COORDINATE.value, best_f))
        return True

    # a cycle is one pass through the phases; a stalled cycle restarts from a
    # fresh draw when budget remains and restarts are enabled
    while reason is None:
        if config.sqp_first and config.enable_sqp and not target_hit():
            status = run_local()
            if status is LocalStatus.BUDGET_EXHAUSTED:
                reason = "eval_budget"
                break

        # phase 1: sequential coordinate blocks of size m1
        state.phase = Phase.COORDINATE
        while reason is None:
            if target_hit():
                reason = "target"
                break
            if out_of_budget():
                reason = classify_budget()
                break
            f_prev = state.incumbent_f
            sub_reason = run_subproblem(
                select_coords(state, n, config.m1, CoordMode.SEQUENTIAL),
                Phase.COORDINATE)
            if sub_reason == "budget":
                reason = "eval_budget"
                break
            state.stall_streak, switched = stall_update(
                state.stall_streak, f_prev, state.incumbent_f,
                config.switch_eps, config.t1)
            if switched:
                if config.enable_switch:
                    break
                # coordinate-only mode has no later phase to escape a
                # coordinate-wise trap: restart immediately
                if not restart():
                    break

        # phase 2: one local polish
        if reason is None and config.enable_sqp and not config.sqp_first:
            if not target_hit() and not out_of_budget():
                status = run_local()
                if status is LocalStatus.BUDGET_EXHAUSTED:
                    reason = "eval_budget"

        # phase 3: random coordinate blocks of size m2
        stalled = False
        if reason is None:
            state.phase = Phase.BLOCK
            global_stall = 0
            patience = min(n, 6)
            while reason is None:
                if target_hit():
                    reason = "target"
                    break
                if out_of_budget():
                    reason = classify_budget()
                    break
                f_prev = state.incumbent_f
                sub_reason = run_subproblem(
                    select_coords(state, n, config.m2, CoordMode.RANDOM,
                                  block_rng),
                    Phase.BLOCK)
                if sub_reason == "budget":
                    reason = "eval_budget"
                    break
                if f_prev - state.incumbent_f <= config.global_stall_eps:
                    global_stall += 1
                    if global_stall >= patience:
                        stalled = True
                        break
                else:
                    global_stall = 0

        if reason is None:
            if target_hit():
                reason = "target"
            elif out_of_budget():
                reason = classify_budget()
            elif not stalled:
                continue
            else:
                # intensify around the global best before abandoning it: one
                # more polish, then a full coordinate sweep (phase 1 may have
                # switched away before visiting every coordinate)
                f_before = best_f
                state.incumbent_x = best_x.copy()
                state.incumbent_f = best_f
                if config.enable_sqp:
                    status = run_local()
                    if status is LocalStatus.BUDGET_EXHAUSTED:
                        reason = "eval_budget"
                if reason is None and best_f >= f_before - config.global_stall_eps:
                    state.cursor = 0
                    for _ in range(-(-n // config.m1)):
                        if target_hit():
                            reason = "target"
                            break
                        if out_of_budget():
                            reason = classify_budget()
                            break
                        sub_reason = run_subproblem(
                            select_coords(state, n, config.m1,
                                          CoordMode.SEQUENTIAL),
                            Phase.COORDINATE, deep=True)
                        if sub_reason == "budget":
                            reason = "eval_budget"
                            break
                if reason is not None:
                    break
                if target_hit():
                    reason = "target"
                elif best_f < f_before - config.global_stall_eps:
                    state.stall_streak = 0
                    state.cursor = 0
                    continue  # the best moved: run the phases again from it
                elif not config.restart_on_stall or (
                        config.max_evals is None
                        and config.max_subproblems is None
                        and config.max_seconds is None):
                    # without any budget a restart loop could never terminate
                    reason = "global_stall"
                elif not restart():
                    break

    if reason is None:
        reason = "target" if target_hit() else classify_budget()
    state.phase = Phase.DONE
    return AbcdResult(
        f_min=best_f,
        x_min=best_x,
        evals=spent(),
        subproblems=state.subproblem_index,
        reason=reason,
        trace=trace,
    )
