"""Independent checks of primal/dual pairs.

Dual feasibility is checked from the stored factors: the completely
positive blocks are certified by nonnegativity of the factors, the linear
equalities are recomputed from the Gram products.
"""

import json
from dataclasses import asdict, dataclass

import numpy as np

from .config import DEFAULTS, GenConfig
from .dualgen import ExtendedDualSolution, initial_state, restriction_problem
from .lp import OPTIMAL, solve_lp
from .model import constraint_matrix, feasibility_check
from .symcore import simplex_grid
from .validation import CopodualError, check_vector

STRONG = "strong_duality"
WEAK = "weak_only"
INFEASIBLE_DUAL = "infeasible_dual"

AUDIT_TOL = 1e-7
WEAK_TOL = 1e-6


class InfeasibleInputError(CopodualError, ValueError):
    pass


def _inner(S, prog):
    """``S . A_j`` for j = 0..n."""
    return np.einsum("ik,jik->j", S, prog.stacked)


def dual_feasible(prog, sol, tol=1e-7):
    """Residuals of every equality of the extended dual.

    Returns a dict with per-level residual vectors (j = 0..n), the objective
    residuals ``(U + W_m0) . A_j - c_j`` (j = 1..n), the largest absolute
    residual, the smallest factor entry and a ``feasible`` flag.
    """
    if not isinstance(sol, ExtendedDualSolution):
        raise TypeError("sol must be an ExtendedDualSolution")
    if sol.p != prog.p:
        raise ValueError(f"solution dimension {sol.p} != program dimension {prog.p}")
    levels = []
    for m in range(1, sol.m0 + 1):
        levels.append(_inner(sol.U_level(m) + sol.W(m - 1), prog))
    top = _inner(sol.U + sol.W(sol.m0), prog)[1:] - prog.c
    allres = np.concatenate([np.abs(np.concatenate(levels)) if levels else np.zeros(0),
                             np.abs(top)])
    max_res = float(allres.max(initial=0.0))
    min_entry = sol.min_factor_entry()
    return {"level_residuals": [lv.tolist() for lv in levels],
            "objective_residuals": top.tolist(),
            "max_residual": max_res,
            "min_factor_entry": min_entry,
            "w0_zero": True,
            "feasible": bool(max_res <= tol and min_entry >= 0.0)}


def decomposition_audit(prog, x, sol):
    """``sum tau^T A(x) tau + sum lambda^T A(x) tau - (U + W_m0) . A0`` minus ``c^T x``.

    The sums run over the columns of the stored factors, so this recomputes
    ``c^T x`` through the factor decomposition of the dual solution.
    """
    x = check_vector(x, prog.n, "x")
    Ax = constraint_matrix(prog, x)
    V = sol.final_V
    total = float(np.einsum("ik,ij,jk->", V, Ax, V))
    if sol.m0:
        Vm, Lm = sol.levels[-1]
        total += float(np.einsum("ik,ij,jk->", Lm, Ax, Vm))
    total -= float(np.sum((sol.U + sol.W(sol.m0)) * prog.A[0]))
    return total - float(prog.c @ x)


def weak_duality_gap(prog, x, sol, grid=None, check=True):
    """``c^T x + (U + W_m0) . A0``, nonnegative for feasible pairs."""
    x = check_vector(x, prog.n, "x")
    if check:
        rep = feasibility_check(prog, x, grid)
        if not rep.feasible:
            raise InfeasibleInputError(f"x is not feasible (min quad {rep.min_value:.3g})")
        res = dual_feasible(prog, sol, tol=WEAK_TOL)
        if not res["feasible"]:
            raise InfeasibleInputError(f"dual solution infeasible (residual "
                                       f"{res['max_residual']:.3g})")
    gap = float(prog.c @ x) - sol.dual_value(prog)
    audit = decomposition_audit(prog, x, sol)
    scale = 1.0 + abs(float(prog.c @ x)) + np.abs(x).max(initial=0.0)
    if check and abs(audit) > AUDIT_TOL * scale:
        raise CopodualError(f"factor decomposition audit failed by {audit:.3g}")
    return gap


@dataclass
class DualityReport:
    primal_value: float
    dual_value: float
    gap: float
    max_residual: float
    min_factor_entry: float
    verdict: str

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def strong_duality_report(prog, x0, sol, tol=DEFAULTS["gap_tol"]):
    x0 = check_vector(x0, prog.n, "x0")
    pv = float(prog.c @ x0) + 0.0
    dv = sol.dual_value(prog)
    res = dual_feasible(prog, sol, tol=tol)
    gap = pv - dv
    if res["max_residual"] > tol or res["min_factor_entry"] < 0:
        verdict = INFEASIBLE_DUAL
    elif abs(gap) <= tol * (1.0 + abs(pv)):
        verdict = STRONG
    else:
        verdict = WEAK
    return DualityReport(primal_value=pv, dual_value=dv, gap=gap,
                         max_residual=res["max_residual"],
                         min_factor_entry=res["min_factor_entry"], verdict=verdict)


def slater_probe(prog, grid=None, tol=DEFAULTS["mu_threshold"]):
    """True if some ``x`` makes ``t^T A(x) t`` uniformly positive on the grid."""
    cfg = GenConfig()
    grid = grid or simplex_grid(prog.p, cfg.grid)
    lp = restriction_problem(prog, initial_state(prog), grid, cfg=cfg)
    sol = solve_lp(lp, cfg.lp_rule)
    if sol.status != OPTIMAL:
        return False
    return bool(sol.y[-1] < -tol)
