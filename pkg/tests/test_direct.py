"""Partition geometry, potentially-optimal selection and the DIRECT loop."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from abcdirect.direct import (
    DirectConfig,
    PartitionState,
    assert_disjoint_interiors,
    direct_solve,
    identify_poh,
    measure,
    sample_and_divide,
    volume_fraction,
)
from abcdirect.problem import Bounds, EvalCounter, Problem, normalize


def box_problem(fn, n, lo=0.0, hi=1.0, target=None):
    return Problem(fn, Bounds(np.full(n, lo), np.full(n, hi)),
                   known_optimum=target)


def brute_force_poh(state, eps, grid=None):
    """Literal rate-of-change-constant sweep: a rectangle is potentially
    optimal when some candidate K makes it best and nontrivially below the
    incumbent. Non-representatives of a measure group fail the 'best'
    comparison at every K, so sweeping all rectangles is safe. The log grid
    alone can miss narrow admissible-K windows, so every pairwise slope
    (the exact window endpoints) is added to the candidates."""
    if grid is None:
        grid = np.logspace(-6, 6, 1201)
    rects = state.rectangles()
    ds = np.array([r.measure for r in rects])
    fs = np.array([r.value for r in rects])
    dd = ds[:, None] - ds[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        slopes = (fs[:, None] - fs[None, :]) / dd
    slopes = slopes[np.isfinite(slopes) & (slopes > 0)]
    grid = np.concatenate([grid, slopes])
    f_min = fs.min()
    out = set()
    for j in range(len(rects)):
        for K in grid:
            lhs = fs[j] - K * ds[j]
            if (lhs <= fs - K * ds).all() and lhs <= f_min - eps * abs(f_min):
                out.add(j)
                break
    return out


def random_partition(rng, n=2, max_groups=12):
    state = PartitionState(n, EvalCounter())
    groups = rng.integers(2, max_groups + 1)
    for _ in range(groups):
        lv = rng.integers(0, 6, size=n).astype(np.int16)
        for _ in range(rng.integers(1, 4)):
            state.add(np.full(n, 0.5), lv, (1,) * n, float(rng.normal(0, 5)))
    return state


class TestMeasure:
    def test_unit_cube_half_diagonal(self):
        assert measure(np.zeros(3)) == pytest.approx(0.5 * np.sqrt(3.0))

    def test_partial_trisection_formula(self):
        # p dims at level k+1, the rest at level k
        n, k, p = 5, 2, 3
        levels = np.array([k + 1] * p + [k] * (n - p))
        want = 0.5 * np.sqrt(3.0 ** (-2 * (k + 1)) * p + 3.0 ** (-2 * k) * (n - p))
        assert measure(levels) == pytest.approx(want, abs=1e-15)

    def test_rejects_negative_levels(self):
        with pytest.raises(ValueError):
            measure(np.array([-1, 0]))


class TestDivision:
    def test_two_dim_worked_example(self):
        # dimension 0 has the lower probe minimum, so it divides first: its
        # children keep levels (1,0) while dimension 1's children get (1,1)
        def f(x):
            return float(x[0] + 10.0 * abs(x[1] - 0.5))

        problem = box_problem(f, 2)
        nproblem = normalize(problem)
        counter = EvalCounter()
        state = PartitionState(2, counter)
        state.add(np.full(2, 0.5), np.zeros(2, dtype=np.int16), (1, 1),
                  nproblem.evaluate_counted(np.full(2, 0.5), counter))

        new_ids = sample_and_divide(0, state, nproblem)
        assert counter.count == 5
        assert len(new_ids) == 4

        got = {tuple(np.round(r.center, 12)): tuple(r.levels)
               for r in state.rectangles()}
        third = 1.0 / 3.0
        assert got[(0.5, 0.5)] == (1, 1)                 # parent, rekeyed
        assert got[(round(0.5 - third, 12), 0.5)] == (1, 0)
        assert got[(round(0.5 + third, 12), 0.5)] == (1, 0)
        assert got[(0.5, round(0.5 - third, 12))] == (1, 1)
        assert got[(0.5, round(0.5 + third, 12))] == (1, 1)

    def test_division_ties_break_to_lower_dimension(self):
        # symmetric f: both dims have equal w, so dim 0 divides first and
        # its children stay the larger rectangles
        def f(x):
            return float(abs(x[0] - 0.5) + abs(x[1] - 0.5))

        problem = box_problem(f, 2)
        nproblem = normalize(problem)
        counter = EvalCounter()
        state = PartitionState(2, counter)
        state.add(np.full(2, 0.5), np.zeros(2, dtype=np.int16), (1, 1),
                  nproblem.evaluate_counted(np.full(2, 0.5), counter))
        sample_and_divide(0, state, nproblem)
        got = {tuple(np.round(r.center, 12)): tuple(r.levels)
               for r in state.rectangles()}
        third = 1.0 / 3.0
        assert got[(round(0.5 - third, 12), 0.5)] == (1, 0)
        assert got[(0.5, round(0.5 - third, 12))] == (1, 1)

    def test_exact_centers_survive_deep_division(self):
        def f(x):
            return float(np.sum((x - 0.123) ** 2))

        problem = box_problem(f, 2)
        res = direct_solve(problem, DirectConfig(max_evals=500),
                           keep_state=True)
        for r in res.state.rectangles():
            exact = [num / (2.0 * 3.0 ** lv)
                     for num, lv in zip(r.exact, r.levels)]
            assert np.allclose(exact, r.center, atol=1e-15)
            assert all(num % 2 == 1 for num in r.exact)


class TestPoh:
    def test_rejects_nonpositive_eps(self):
        state = random_partition(np.random.default_rng(0))
        with pytest.raises(ValueError):
            identify_poh(state, 0.0)

    def test_single_rectangle_is_selected(self):
        state = PartitionState(2, EvalCounter())
        state.add(np.full(2, 0.5), np.zeros(2, dtype=np.int16), (1, 1), 3.0)
        assert identify_poh(state, 1e-4) == [0]

    def test_largest_measure_always_included(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            state = random_partition(rng)
            poh = identify_poh(state, 1e-4)
            keys = [state._keys[r.id] for r in state.rectangles()]
            assert max(state._keys[i] for i in poh) == max(keys)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10 ** 9))
    def test_matches_brute_force_sweep(self, seed):
        state = random_partition(np.random.default_rng(seed))
        got = set(identify_poh(state, 1e-4))
        assert got == brute_force_poh(state, 1e-4)


class TestTiling:
    def test_volume_and_disjointness_maintained(self):
        def f(x):
            return float(np.sum(np.sin(3.0 * x) + (x - 0.3) ** 2))

        problem = box_problem(f, 3)

        def check(state, changed):
            assert volume_fraction(state) == 1
            assert_disjoint_interiors(state)            # full pairwise pass
            assert_disjoint_interiors(state, changed)   # incremental pass

        res = direct_solve(problem, DirectConfig(max_evals=600),
                           iteration_hook=check, keep_state=True)
        assert res.state.size > 100


class TestDirectSolve:
    def test_flat_sixth_power_converges_fast(self):
        problem = Problem(
            lambda x: float(0.1 * (x[0] - 0.4) ** 6),
            Bounds(np.array([-1.0]), np.array([1.0])),
            known_optimum=0.0,
        )
        res = direct_solve(problem, DirectConfig(max_iters=10))
        assert res.reason == "target"
        assert abs(res.f_min) <= 1e-4
        assert res.iterations <= 10

    def test_iter_budget_stop(self):
        problem = box_problem(lambda x: float(np.sum(x)), 2)
        res = direct_solve(problem, DirectConfig(max_iters=3))
        assert res.reason == "iter_budget"
        assert res.iterations == 3

    def test_eval_budget_stop_counts_locally(self):
        problem = box_problem(lambda x: float(np.sum(x * x)), 2)
        counter = EvalCounter()
        counter.count = 1000         # pre-spent global budget
        res = direct_solve(problem, DirectConfig(max_evals=50),
                           counter=counter)
        assert res.reason == "eval_budget"
        assert res.evals <= 50 + 8   # may finish the division in flight

    def test_shared_cap_exhaustion_is_graceful(self):
        problem = box_problem(lambda x: float(np.sum(x * x)), 2)
        counter = EvalCounter(cap=20)
        res = direct_solve(problem, DirectConfig(), counter=counter)
        assert res.reason == "budget"
        assert counter.count == 20
        assert np.isfinite(res.f_min)

    def test_min_measure_stop(self):
        problem = box_problem(lambda x: float(np.sum(x * x)), 1)
        res = direct_solve(problem, DirectConfig(min_measure=1e-3))
        assert res.reason == "converged"

    def test_stall_stop(self):
        # constant objective: f_min can never improve
        problem = box_problem(lambda x: 1.0, 2)
        res = direct_solve(problem,
                           DirectConfig(stall_eps=1e-8, stall_iters=4))
        assert res.reason == "converged"
        assert res.iterations >= 4

    def test_trace_is_monotone(self):
        problem = box_problem(lambda x: float(np.sum((x - 0.37) ** 2)), 2)
        res = direct_solve(problem, DirectConfig(max_evals=300))
        fs = [f for _, _, f in res.trace]
        assert all(a >= b for a, b in zip(fs, fs[1:]))

    def test_result_in_user_space(self):
        problem = Problem(
            lambda x: float(np.sum((x - 5.0) ** 2)),
            Bounds(np.array([2.0, 2.0]), np.array([8.0, 8.0])),
        )
        res = direct_solve(problem, DirectConfig(max_evals=400))
        assert problem.bounds.contains(res.x_min)
        assert np.allclose(res.x_min, 5.0, atol=0.2)
