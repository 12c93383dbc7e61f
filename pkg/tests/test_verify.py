import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from copodual.dualgen import ExtendedDualSolution, build_dual
from copodual.model import CopositiveProgram, load_fixture
from copodual.symcore import quad_form
from copodual.verify import (INFEASIBLE_DUAL, STRONG, WEAK, InfeasibleInputError,
                             decomposition_audit, dual_feasible, slater_probe,
                             strong_duality_report, weak_duality_gap)
from helpers import certified_points, planted_program, rand_sym

EX_NS = load_fixture("ex_ns")
EX_SL = load_fixture("ex_sl")
SL_DUAL = ExtendedDualSolution([], [[1.0], [0.0]])


def test_dual_feasible_ex_ns():
    sol = build_dual(EX_NS).solution
    assert dual_feasible(EX_NS, sol)["max_residual"] <= 1e-7
    V = sol.final_V.copy()
    V[0, 0] = np.sqrt(V[0, 0] ** 2 + 0.1)
    bad = ExtendedDualSolution(sol.levels, V)
    rep = dual_feasible(EX_NS, bad)
    assert rep["objective_residuals"][0] == pytest.approx(0.1)
    assert not rep["feasible"]


def test_dual_feasible_m0_zero():
    rep = dual_feasible(EX_SL, SL_DUAL)
    assert rep["level_residuals"] == [] and rep["feasible"]
    assert rep["objective_residuals"] == [0.0]


def test_weak_duality_examples():
    assert weak_duality_gap(EX_SL, [1], SL_DUAL) == pytest.approx(1)
    assert weak_duality_gap(EX_SL, [0], SL_DUAL) == pytest.approx(0)
    sol = build_dual(EX_NS).solution
    assert weak_duality_gap(EX_NS, [0], sol) == pytest.approx(0)
    with pytest.raises(InfeasibleInputError):
        weak_duality_gap(EX_NS, [-1], sol)


def test_strong_duality_report_examples():
    for prog in (EX_NS, EX_SL):
        res = build_dual(prog)
        rep = strong_duality_report(prog, res.x, res.solution)
        assert rep.verdict == STRONG and abs(rep.gap) <= 1e-6
    rep = strong_duality_report(EX_NS, [1], build_dual(EX_NS).solution)
    assert rep.verdict == WEAK and rep.gap == pytest.approx(1)
    rep = strong_duality_report(EX_SL, [0], ExtendedDualSolution([], [[2.0], [0.0]]))
    assert rep.verdict == INFEASIBLE_DUAL
    assert json.loads(rep.to_json())["verdict"] == INFEASIBLE_DUAL


def test_slater_probe_examples():
    assert slater_probe(EX_SL)
    assert not slater_probe(EX_NS)
    assert slater_probe(CopositiveProgram((np.eye(3),), []))


def random_ns_dual(rng):
    """Random dual-feasible factors for the non-Slater fixture."""
    k = int(rng.integers(1, 4))
    V1 = rng.random((2, k))
    V1[0] = 0.0
    L1 = rng.random((2, k))
    fv = rng.random((2, k))
    fv[0] /= np.linalg.norm(fv[0])
    return ExtendedDualSolution([(V1, L1)], fv)


def random_sl_dual(rng):
    fv = rng.random((2, int(rng.integers(1, 4))))
    return ExtendedDualSolution([], fv / np.linalg.norm(fv))


@given(st.integers(0, 2 ** 32 - 1))
def test_weak_duality_random_pairs(seed):
    rng = np.random.default_rng(seed)
    for prog, sol in ((EX_NS, random_ns_dual(rng)), (EX_SL, random_sl_dual(rng))):
        assert dual_feasible(prog, sol)["feasible"]
        x = rng.random(1) * 5
        assert weak_duality_gap(prog, x, sol) >= -1e-6


def test_weak_duality_planted(rng):
    for _ in range(10):
        prog, _, _, psd = planted_program(rng, 3, 2, with_psd=True)
        res = build_dual(prog)
        for x in certified_points(rng, prog, psd, 5):
            assert weak_duality_gap(prog, x, res.solution) >= -1e-6
        assert abs(decomposition_audit(prog, res.x, res.solution)) <= 1e-7 * (
            1 + abs(res.primal_value))


@given(st.integers(0, 2 ** 32 - 1))
def test_nonnegative_rows_give_nonnegative_hull(seed):
    rng = np.random.default_rng(seed)
    p = int(rng.integers(2, 6))
    taus = rng.dirichlet(np.ones(p), size=int(rng.integers(1, 4)))
    A = rand_sym(rng, p)
    shift = max(0.0, -(taus @ A).min())
    A = A + shift * np.ones((p, p))
    assert np.all(taus @ A >= -1e-12)
    for w in rng.dirichlet(np.ones(len(taus)), size=10):
        assert quad_form(A, w @ taus) >= -1e-8


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        dual_feasible(EX_NS, ExtendedDualSolution([], np.ones((3, 1))))
    with pytest.raises(TypeError):
        dual_feasible(EX_NS, "not a solution")
