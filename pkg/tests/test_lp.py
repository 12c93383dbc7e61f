import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog

from copodual.lp import (INFEASIBLE, OPTIMAL, UNBOUNDED, LinearProgram, active_support,
                         kkt_residuals, solve_lp)
from copodual.validation import DimensionError
from oracles import brute_force_lp, random_lp


def test_examples():
    sol = solve_lp(LinearProgram([-1.0], [[-1.0], [1.0]], [-1.0, 0.0]))
    assert sol.status == OPTIMAL
    assert sol.y[0] == pytest.approx(1) and sol.value == pytest.approx(-1)
    assert sol.ineq_duals[0] == pytest.approx(1) and sol.ineq_duals[1] == pytest.approx(0)

    sol = solve_lp(LinearProgram([0.0], E=[[1.0]], d=[5.0]))
    assert sol.y[0] == pytest.approx(5) and sol.value == 0

    sol = solve_lp(LinearProgram([1.0], [[1.0], [1.0]], [1.0, 2.0]))
    assert sol.y[0] == pytest.approx(2)
    assert np.allclose(sol.ineq_duals, [0, 1])
    assert active_support(sol) == [1]


def test_active_support_empty_and_degenerate():
    sol = solve_lp(LinearProgram([0.0], [[1.0]], [0.0], upper=[3.0]))
    assert active_support(sol) == []
    sol = solve_lp(LinearProgram([1.0], [[1.0], [2.0]], [0.0, 0.0]))
    assert sol.value == pytest.approx(0)
    assert len(active_support(sol)) == 1
    with pytest.raises(ValueError):
        active_support(solve_lp(LinearProgram([-1.0], [[1.0]], [0.0])))


def test_statuses():
    assert solve_lp(LinearProgram([-1.0], [[1.0]], [0.0])).status == UNBOUNDED
    assert solve_lp(LinearProgram([1.0], [[1.0], [-1.0]], [1.0, 0.0])).status == INFEASIBLE
    assert solve_lp(LinearProgram([1.0], lower=[0.0], upper=[1.0], E=[[1.0]],
                                  d=[2.0])).status == INFEASIBLE


def test_bounds_and_duals():
    lp = LinearProgram([1.0, -1.0], [[1.0, 1.0]], [1.0], lower=[0.0, -2.0], upper=[3.0, 2.0])
    sol = solve_lp(lp)
    assert sol.value == pytest.approx(-2.0)
    res = kkt_residuals(lp, sol)
    assert max(res.values()) <= 1e-9


def test_construction_errors():
    with pytest.raises(DimensionError):
        LinearProgram([1.0, 2.0], [[1.0]], [1.0])
    with pytest.raises(ValueError):
        LinearProgram([1.0], lower=[2.0], upper=[1.0])
    with pytest.raises(ValueError):
        LinearProgram([np.nan])


@pytest.mark.parametrize("rule", ["bland", "dantzig"])
def test_random_against_highs(rng, rule):
    for _ in range(40):
        n = int(rng.integers(1, 12))
        m = int(rng.integers(n, 60))
        lp, _ = random_lp(rng, n, m)
        sol = solve_lp(lp, rule)
        ref = linprog(lp.objective, A_ub=-lp.G, b_ub=-lp.h, bounds=[(None, None)] * n,
                      method="highs")
        assert sol.status == OPTIMAL and ref.status == 0
        assert sol.value == pytest.approx(ref.fun, abs=1e-7 * (1 + abs(ref.fun)))
        res = kkt_residuals(lp, sol)
        assert max(res.values()) <= 1e-7 * (1 + abs(sol.value))
        assert len(active_support(sol)) <= n


def test_random_against_vertices(rng):
    for _ in range(30):
        n = int(rng.integers(1, 5))
        m = int(rng.integers(n, 10))
        lp, _ = random_lp(rng, n, m)
        sol = solve_lp(lp)
        assert sol.value == pytest.approx(brute_force_lp(lp), abs=1e-7 * (1 + abs(sol.value)))


def test_unbounded_random(rng):
    hits = 0
    for _ in range(20):
        lp, _ = random_lp(rng, 4, 3, bounded=False)
        ref = linprog(lp.objective, A_ub=-lp.G, b_ub=-lp.h, bounds=[(None, None)] * 4,
                      method="highs")
        sol = solve_lp(lp)
        assert (sol.status == UNBOUNDED) == (ref.status == 3)
        hits += sol.status == UNBOUNDED
    assert hits > 0


def test_determinism(rng):
    lp, _ = random_lp(rng, 6, 30)
    a, b = solve_lp(lp), solve_lp(lp)
    assert a.basis == b.basis and a.pivots == b.pivots
    assert np.array_equal(a.y, b.y) and np.array_equal(a.ineq_duals, b.ineq_duals)


@given(st.integers(0, 2 ** 32 - 1))
def test_strong_duality_and_feasibility(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 20))
    lp, _ = random_lp(rng, n, int(rng.integers(n, 200)))
    sol = solve_lp(lp)
    assert sol.status == OPTIMAL
    assert sol.value == pytest.approx(lp.h @ sol.ineq_duals, abs=1e-7 * (1 + abs(sol.value)))
    assert (lp.G @ sol.y - lp.h).min() >= -1e-8
