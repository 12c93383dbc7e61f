import numpy as np
import pytest
from sklearn.base import clone

from copodual.config import GenConfig
from copodual.dualgen import (CONTINUE, SLATER, STATUS_INFEASIBLE, STATUS_OPTIMAL,
                              STATUS_UNBOUNDED, ExtendedDualBuilder, ExtendedDualSolution,
                              GuardViolation, IterationState, build_dual, check_level_guard,
                              final_step, find_immobile, initial_state, iterate,
                              restriction_problem, verify_immobile)
from copodual.lp import solve_lp
from copodual.model import feasibility_check, load_fixture
from copodual.symcore import dist_to_hull, simplex_grid
from copodual.verify import dual_feasible
from helpers import planted_program

EX_NS = load_fixture("ex_ns")
EX_SL = load_fixture("ex_sl")


def level_one_state():
    return iterate(EX_NS, initial_state(EX_NS)).state


def test_restriction_level0_ex_ns():
    lp = restriction_problem(EX_NS, initial_state(EX_NS), simplex_grid(2, 4))
    assert lp.G.shape == (5, 2)
    sol = solve_lp(lp)
    assert sol.y[-1] == pytest.approx(0, abs=1e-12)


def test_restriction_level0_ex_sl():
    for k in (2, 5, 16):
        sol = solve_lp(restriction_problem(EX_SL, initial_state(EX_SL), simplex_grid(2, k)))
        assert sol.y[-1] < 0


def test_restriction_level1_ex_ns():
    state = level_one_state()
    grid = simplex_grid(2, 8)
    lp = restriction_problem(EX_NS, state, grid, eps=0.5)
    quad_rows = lp.G[2:]
    # each quad row is (t1^2, 1); the kept points have t1 >= 0.35
    assert np.all(np.sqrt(quad_rows[:, 0]) >= 0.35)
    assert len(quad_rows) < len(grid)
    assert solve_lp(lp).y[-1] < 0


def test_iterate_ex_ns():
    out = iterate(EX_NS, initial_state(EX_NS))
    assert out.kind == CONTINUE
    st = out.state
    assert np.allclose(st.taus, [[0, 1]]) and np.allclose(st.gammas, [1])
    U1 = st.V_levels[0] @ st.V_levels[0].T
    assert np.allclose(U1, [[0, 0], [0, 1]])
    assert np.sum(U1 * EX_NS.A[1]) == 0 and np.sum(U1 * EX_NS.A[0]) == 0
    nxt = iterate(EX_NS, st)
    assert nxt.kind == SLATER and nxt.mu < 0


def test_iterate_ex_sl_and_infeasible():
    assert iterate(EX_SL, initial_state(EX_SL)).kind == SLATER
    inf = load_fixture("infeasible")
    assert iterate(inf, initial_state(inf)).kind == STATUS_INFEASIBLE


def test_verify_immobile_examples():
    g = simplex_grid(2, 16)
    assert verify_immobile(EX_NS, [0, 1], g)
    assert not verify_immobile(EX_NS, [1, 0], g)
    assert not verify_immobile(EX_SL, [1, 0], g)


def test_final_step_ex_ns():
    state = level_one_state()
    out = iterate(EX_NS, state)
    fin = final_step(EX_NS, state, eps=out.epsilon)
    sol = fin.solution
    assert sol.m0 == 1
    assert np.allclose(fin.x, [0])
    assert np.allclose(sol.U, [[1, 0], [0, 0]])
    assert np.allclose(sol.W(1), 0)
    assert sol.dual_value(EX_NS) == pytest.approx(0) == fin.value


def test_final_step_ex_sl():
    fin = final_step(EX_SL, initial_state(EX_SL))
    sol = fin.solution
    assert sol.m0 == 0 and np.allclose(fin.x, 0)
    assert np.sum(sol.U * np.eye(2)) == pytest.approx(1)
    assert sol.dual_value(EX_SL) == 0


def test_zero_objective():
    prog = EX_NS.with_objective([0.0])
    res = build_dual(prog)
    assert res.status == STATUS_OPTIMAL
    assert res.primal_value == pytest.approx(0) and res.dual_value == pytest.approx(0)


def test_build_dual_examples():
    ns = build_dual(EX_NS)
    assert ns.status == STATUS_OPTIMAL and ns.m0 == 1 and abs(ns.gap) <= 1e-6
    assert ns.slater is False
    assert np.allclose(ns.immobile[0], [[0, 1]])
    sl = build_dual(EX_SL)
    assert sl.status == STATUS_OPTIMAL and sl.m0 == 0 and abs(sl.gap) <= 1e-6 and sl.slater
    assert build_dual(load_fixture("ex_ns_unbounded")).status == STATUS_UNBOUNDED
    assert build_dual(load_fixture("infeasible")).status == STATUS_INFEASIBLE


def test_find_immobile_examples():
    status, levels, slater, _ = find_immobile(EX_NS)
    assert status == STATUS_OPTIMAL and not slater
    assert len(levels) == 1 and np.allclose(levels[0], [[0, 1]])
    status, levels, slater, _ = find_immobile(EX_SL)
    assert levels == [] and slater


def test_level_guard():
    ok = IterationState(p=3, level_supports=(((0,),), ((1, 2),)))
    check_level_guard(ok)
    with pytest.raises(GuardViolation):
        check_level_guard(IterationState(p=3, level_supports=(((0,),), ((0,),))))
    with pytest.raises(GuardViolation):
        check_level_guard(IterationState(p=3, level_supports=(((0,),), ((0, 1),))))


def test_solution_serialization():
    sol = build_dual(EX_NS).solution
    back = ExtendedDualSolution.from_dict(sol.to_dict())
    assert back.m0 == sol.m0 and np.allclose(back.U, sol.U) and np.allclose(back.W(1), sol.W(1))
    with pytest.raises(ValueError):
        ExtendedDualSolution([], -np.ones((2, 1)))


def test_planted_programs(rng):
    """Level equalities, normalization, immobility and termination on random programs."""
    for trial in range(25):
        p = int(rng.integers(2, 5))
        n = int(rng.integers(1, 4))
        prog, K, _ = planted_program(rng, p, n, edge=trial % 3 == 0)
        cfg = GenConfig()
        grid = simplex_grid(p, cfg.grid)
        res = build_dual(prog, cfg)
        assert res.status == STATUS_OPTIMAL
        assert 1 <= res.m0 <= 2 ** p - 1
        assert abs(res.gap) <= 1e-6 * (1 + abs(res.primal_value))
        assert dual_feasible(prog, res.solution)["max_residual"] <= 1e-7
        assert feasibility_check(prog, res.x).feasible
        for rec in res.trace:
            if rec.get("outcome") == CONTINUE:
                assert 1 <= rec["delta_size"] <= n + 1
                assert rec["gamma_sum"] == pytest.approx(1, abs=1e-9)
                assert max(rec["residuals"]) <= 1e-7 * (1 + np.abs(prog.stacked).max())
        known = np.zeros((0, p))
        for lv in res.immobile:
            for t in lv:
                assert verify_immobile(prog, t, grid, cfg)
                if len(known):
                    assert dist_to_hull(t, known) > 1e-9
            known = np.vstack([known, lv])
        # planted vertices are immobile and must be covered by the found hull
        for k in K:
            assert dist_to_hull(np.eye(p)[k], known) <= 1e-9


def test_estimator_interface():
    est = ExtendedDualBuilder(grid=12)
    assert clone(est).get_params() == est.get_params()
    est.fit(EX_NS)
    assert est.status_ == STATUS_OPTIMAL and est.m0_ == 1
    assert est.score(EX_NS) == pytest.approx(0, abs=1e-9)
    assert set(est.get_params()) <= set(GenConfig.__dataclass_fields__)


def test_max_iters_cap(rng):
    from copodual.dualgen import IterationCapError
    for _ in range(40):
        prog, _, _ = planted_program(rng, 4, 2, edge=True)
        res = build_dual(prog)
        if res.m0 >= 2:
            break
    else:
        pytest.skip("no two-level program drawn")
    with pytest.raises(IterationCapError) as err:
        build_dual(prog, GenConfig(max_iters=res.m0 - 1))
    assert err.value.trace
