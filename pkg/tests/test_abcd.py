"""Block-coordinate solver: start selection, subproblems, phase switching."""

import numpy as np
import pytest

from abcdirect.abcd import (
    AbcdConfig,
    AbcdState,
    CoordMode,
    Phase,
    abcd_solve,
    choose_start,
    make_subproblem,
    select_coords,
    stall_update,
)
from abcdirect.direct import DirectConfig, direct_solve
from abcdirect.problem import Bounds, ConfigError, EvalCounter, Problem


def sphere(n, lo=-2.0, hi=3.0, target=None):
    return Problem(lambda x: float(np.sum(x * x)),
                   Bounds(np.full(n, lo), np.full(n, hi)),
                   known_optimum=target)


def recording(problem):
    """Wrap a problem so every evaluated point is recorded."""
    pts = []
    base = problem.objective

    def obj(x):
        pts.append(np.array(x, dtype=float))
        return base(x)

    return Problem(obj, problem.bounds, problem.known_optimum), pts


class TestChooseStart:
    def test_uses_exactly_q_evaluations(self):
        counter = EvalCounter()
        x, f = choose_start(sphere(3), 7, np.random.default_rng(0), counter)
        assert counter.count == 7
        assert f == pytest.approx(float(np.sum(x * x)))

    def test_samples_cover_slabs_of_widest_dim(self):
        # dim 1 is widest; one sample must land in each of q slabs
        p = Problem(lambda x: 0.0,
                    Bounds(np.array([0.0, 0.0]), np.array([1.0, 100.0])))
        p, pts = recording(p)
        choose_start(p, 5, np.random.default_rng(1), EvalCounter())
        slabs = sorted(int(pt[1] // 20.0) for pt in pts)
        assert slabs == [0, 1, 2, 3, 4]

    def test_deterministic_given_rng_seed(self):
        a = choose_start(sphere(4), 8, np.random.default_rng(42), EvalCounter())
        b = choose_start(sphere(4), 8, np.random.default_rng(42), EvalCounter())
        assert np.array_equal(a[0], b[0]) and a[1] == b[1]

    def test_rejects_bad_q(self):
        with pytest.raises(ConfigError):
            choose_start(sphere(2), 0, np.random.default_rng(0), EvalCounter())


class TestSelectCoords:
    def test_sequential_wraps_around(self):
        state = AbcdState(np.zeros(5), 0.0, Phase.COORDINATE)
        seen = [list(select_coords(state, 5, 2, CoordMode.SEQUENTIAL))
                for _ in range(5)]
        assert seen == [[0, 1], [2, 3], [4, 0], [1, 2], [3, 4]]

    def test_random_blocks_are_sorted_unique(self):
        state = AbcdState(np.zeros(6), 0.0, Phase.BLOCK)
        rng = np.random.default_rng(0)
        for _ in range(20):
            idx = select_coords(state, 6, 3, CoordMode.RANDOM, rng)
            assert len(set(idx)) == 3
            assert list(idx) == sorted(idx)

    def test_rejects_out_of_range_size(self):
        state = AbcdState(np.zeros(3), 0.0, Phase.BLOCK)
        with pytest.raises(ConfigError):
            select_coords(state, 3, 4, CoordMode.SEQUENTIAL)


class TestMakeSubproblem:
    def test_freezes_complement_coordinates(self):
        p = Problem(lambda x: float(x[0] + 10 * x[1] + 100 * x[2]),
                    Bounds(np.zeros(3), np.ones(3)))
        incumbent = np.array([0.1, 0.2, 0.3])
        sub = make_subproblem(p, incumbent, np.array([1]))
        assert sub.n == 1
        assert sub(np.array([0.5])) == pytest.approx(0.1 + 5.0 + 30.0)
        # the incumbent is copied: later mutation must not leak in
        incumbent[0] = 9.0
        assert sub(np.array([0.5])) == pytest.approx(0.1 + 5.0 + 30.0)

    def test_restricted_bounds(self):
        p = sphere(3, lo=-4.0, hi=2.0)
        sub = make_subproblem(p, np.zeros(3), np.array([0, 2]))
        assert np.array_equal(sub.bounds.lower, [-4.0, -4.0])
        assert np.array_equal(sub.bounds.upper, [2.0, 2.0])


class TestStallUpdate:
    def test_descent_at_threshold_counts_as_stall(self):
        # a descent of exactly eps1 still counts as a stall
        streak, switched = stall_update(0, 2.0, 1.5, 0.5, 2)
        assert streak == 1 and not switched
        streak, switched = stall_update(streak, 1.5, 1.0, 0.5, 2)
        assert streak == 2 and switched

    def test_real_descent_resets_streak(self):
        streak, switched = stall_update(2, 1.0, 0.5, 1e-3, 3)
        assert streak == 0 and not switched


class TestAbcdSolve:
    def test_reaches_target_on_separable_function(self):
        p = sphere(4, target=0.0)
        res = abcd_solve(p, AbcdConfig(max_evals=20000, seed=0))
        assert res.reason == "target"
        assert abs(res.f_min) <= 1e-4

    def test_respects_eval_budget(self):
        p = sphere(6)
        res = abcd_solve(p, AbcdConfig(max_evals=500, seed=0))
        assert res.reason in ("eval_budget",)
        assert res.evals <= 500 + 600   # one subproblem may finish in flight

    def test_subproblem_budget(self):
        p = sphere(4)
        res = abcd_solve(p, AbcdConfig(max_subproblems=3, max_evals=10 ** 6,
                                       seed=0))
        assert res.reason == "subproblem_budget"
        assert res.subproblems == 3

    def test_stall_terminates_without_restarts(self):
        p = Problem(lambda x: 1.0, Bounds(np.zeros(3), np.ones(3)))
        res = abcd_solve(p, AbcdConfig(max_evals=10 ** 6, seed=0,
                                       restart_on_stall=False))
        assert res.reason == "global_stall"

    def test_stall_without_budget_terminates(self):
        # restarts stay enabled, but with no budget at all the stall must end
        # the run rather than loop forever
        p = Problem(lambda x: 1.0, Bounds(np.zeros(3), np.ones(3)))
        res = abcd_solve(p, AbcdConfig(seed=0))
        assert res.reason == "global_stall"

    def test_trace_best_is_monotone(self):
        p = sphere(3, target=0.0)
        res = abcd_solve(p, AbcdConfig(max_evals=5000, seed=1))
        fs = [row[3] for row in res.trace]
        assert all(a >= b for a, b in zip(fs, fs[1:]))

    def test_result_matches_reported_value(self):
        p = sphere(3)
        res = abcd_solve(p, AbcdConfig(max_evals=3000, seed=2))
        assert p(res.x_min) == pytest.approx(res.f_min)

    def test_deterministic_given_seed(self):
        p = sphere(5)
        a = abcd_solve(p, AbcdConfig(max_evals=4000, seed=9))
        b = abcd_solve(p, AbcdConfig(max_evals=4000, seed=9))
        assert a.f_min == b.f_min
        assert np.array_equal(a.x_min, b.x_min)
        assert a.trace == b.trace

    def test_config_validation(self):
        p = sphere(3)
        with pytest.raises(ConfigError):
            abcd_solve(p, AbcdConfig(m1=4))
        with pytest.raises(ConfigError):
            abcd_solve(p, AbcdConfig(t1=0))

    def test_full_block_no_switch_degenerates_to_direct(self):
        """With one n-sized block, no switch and no local phase, the solver
        is a start sample followed by one full-box dividing-rectangles run."""
        base = Problem(
            lambda x: float((x[0] - 0.3) ** 2 + 2.0 * (x[1] + 0.8) ** 2),
            Bounds(np.full(2, -2.0), np.full(2, 2.0)),
        )
        pd, pts_direct = recording(base)
        direct_solve(pd, DirectConfig(max_evals=800, target_accuracy=0.0))

        pa, pts_abcd = recording(base)
        q = min(2 * base.n, 32)
        abcd_solve(pa, AbcdConfig(
            m1=2, enable_switch=False, enable_sqp=False,
            restart_on_stall=False, sub_eval_cap=800, sub_min_measure=0.0,
            sub_stall_eps=0.0, sub_stall_iters=0, max_evals=q + 800,
            seed=0, target_accuracy=0.0))
        tail = pts_abcd[q:q + len(pts_direct)]
        assert len(tail) == len(pts_direct)
        for a, b in zip(tail, pts_direct):
            assert np.array_equal(a, b)
