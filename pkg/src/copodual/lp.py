"""Dense two-phase simplex with dual-multiplier extraction.

Problems have the form::

    minimize    objective^T y
    subject to  G y >= h          (inequality rows, multipliers u >= 0)
                E y  = d          (equality rows, free multipliers v)
                lower <= y <= upper

The tableau simplex runs on the Lagrange dual written in standard form
(``G^T u + E^T v + bound terms = objective``, all columns nonnegative), and
``y`` is read off as the simplex multipliers of that basis.  Working on the
dual is what makes the multipliers *basic*: at most ``num_vars`` of them are
nonzero, the small-support property the restriction problems rely on.
"""

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULTS
from .validation import DimensionError

OPTIMAL = "optimal"
UNBOUNDED = "unbounded"
INFEASIBLE = "infeasible"


class SimplexIterationLimit(RuntimeError):
    pass


@dataclass
class LinearProgram:
    objective: np.ndarray
    G: np.ndarray = None
    h: np.ndarray = None
    E: np.ndarray = None
    d: np.ndarray = None
    lower: np.ndarray = None
    upper: np.ndarray = None

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).reshape(-1)
        n = c.shape[0]
        self.objective = c
        self.G, self.h = _rows(self.G, self.h, n, "inequality")
        self.E, self.d = _rows(self.E, self.d, n, "equality")
        self.lower = np.full(n, -np.inf) if self.lower is None else \
            np.asarray(self.lower, dtype=float).reshape(-1)
        self.upper = np.full(n, np.inf) if self.upper is None else \
            np.asarray(self.upper, dtype=float).reshape(-1)
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise DimensionError("bounds must have one entry per variable")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")
        for name in ("objective", "G", "h", "E", "d"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} has non-finite entries")

    @property
    def num_vars(self):
        return self.objective.shape[0]


def _rows(M, b, n, kind):
    if M is None:
        if b is not None and np.size(b):
            raise DimensionError(f"{kind} rhs given without rows")
        return np.zeros((0, n)), np.zeros(0)
    M = np.asarray(M, dtype=float)
    if M.ndim == 1 and M.size == 0:
        M = M.reshape(0, n)
    M = np.atleast_2d(M)
    if M.shape[1] != n:
        raise DimensionError(f"{kind} rows must have length {n}, got {M.shape[1]}")
    b = np.asarray(b, dtype=float).reshape(-1)
    if b.shape[0] != M.shape[0]:
        raise DimensionError(f"{kind} rhs has length {b.shape[0]}, expected {M.shape[0]}")
    return M, b


@dataclass
class LpSolution:
    status: str
    y: np.ndarray = None
    value: float = np.nan
    ineq_duals: np.ndarray = None
    eq_duals: np.ndarray = None
    lower_duals: np.ndarray = None
    upper_duals: np.ndarray = None
    pivots: int = 0
    basis: list = field(default_factory=list)

    @property
    def optimal(self):
        return self.status == OPTIMAL


def _pivot(T, r, j):
    T[r] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])


def _run_simplex(T, basis, cost, allowed, rule, tol, max_pivots):
    """Primal simplex on tableau ``T`` (last column is the rhs), minimising ``cost``."""
    pivots = 0
    ncols = T.shape[1] - 1
    while True:
        reduced = cost - cost[basis] @ T[:, :ncols] if T.shape[0] else cost.copy()
        cand = np.flatnonzero((reduced < -tol) & allowed)
        if cand.size == 0:
            return OPTIMAL, pivots
        if rule == "bland":
            j = int(cand[0])
        else:
            j = int(cand[np.argmin(reduced[cand])])
        col = T[:, j]
        rows = np.flatnonzero(col > tol)
        if rows.size == 0:
            return UNBOUNDED, pivots
        ratios = T[rows, -1] / col[rows]
        rmin = ratios.min()
        ties = rows[ratios <= rmin + tol * max(1.0, abs(rmin))]
        r = int(min(ties, key=lambda i: basis[i]))
        _pivot(T, r, j)
        basis[r] = j
        pivots += 1
        if pivots > max_pivots:
            raise SimplexIterationLimit(f"simplex exceeded {max_pivots} pivots")


def _dual_standard_form(lp):
    n = lp.num_vars
    lo_idx = np.flatnonzero(np.isfinite(lp.lower))
    hi_idx = np.flatnonzero(np.isfinite(lp.upper))
    I = np.eye(n)
    cols = [lp.G.T, lp.E.T, -lp.E.T, I[:, lo_idx], -I[:, hi_idx]]
    cost = [-lp.h, -lp.d, lp.d, -lp.lower[lo_idx], lp.upper[hi_idx]]
    M = np.hstack(cols) if n else np.zeros((0, sum(c.shape[0] for c in cost)))
    f = np.concatenate(cost)
    sizes = [lp.G.shape[0], lp.E.shape[0], lp.E.shape[0], lo_idx.size, hi_idx.size]
    return M, f, sizes, lo_idx, hi_idx


def solve_lp(lp, rule=DEFAULTS["lp_rule"], pivot_tol=DEFAULTS["pivot_tol"], max_pivots=None):
    """Solve ``lp`` to a basic optimal solution with basic dual multipliers.

    Infeasibility and unboundedness are reported through ``status``.
    """
    if not isinstance(lp, LinearProgram):
        raise TypeError("solve_lp expects a LinearProgram")
    if rule not in ("bland", "dantzig"):
        raise ValueError("rule must be 'bland' or 'dantzig'")
    n = lp.num_vars
    M, f, sizes, lo_idx, hi_idx = _dual_standard_form(lp)
    N = M.shape[1]
    if max_pivots is None:
        max_pivots = 50 * (n + N + 10)
    rhs = lp.objective.copy()
    sign = np.where(rhs < 0, -1.0, 1.0)
    T = np.zeros((n, N + n + 1))
    T[:, :N] = sign[:, None] * M
    T[:, N:N + n] = np.eye(n)
    T[:, -1] = sign * rhs
    basis = list(range(N, N + n))

    # phase 1: minimise the sum of artificials
    cost1 = np.concatenate([np.zeros(N), np.ones(n)])
    allowed = np.concatenate([np.ones(N, bool), np.zeros(n, bool)])
    status, piv1 = _run_simplex(T, basis, cost1, allowed, rule, pivot_tol, max_pivots)
    infeas = float(T[:, -1] @ cost1[basis]) if n else 0.0
    if infeas > 1e-9 * (1.0 + np.abs(rhs).max(initial=0.0)):
        # dual infeasible: the primal is unbounded or infeasible
        if np.any(lp.objective != 0):
            probe = solve_lp(LinearProgram(np.zeros(n), lp.G, lp.h, lp.E, lp.d,
                                           lp.lower, lp.upper), rule, pivot_tol)
            status = UNBOUNDED if probe.status == OPTIMAL else INFEASIBLE
        else:
            status = INFEASIBLE
        return LpSolution(status=status, pivots=piv1)

    # drive zero-level artificials out of the basis where possible
    for r in range(n):
        if basis[r] >= N:
            nz = np.flatnonzero(np.abs(T[r, :N]) > pivot_tol)
            if nz.size:
                _pivot(T, r, int(nz[0]))
                basis[r] = int(nz[0])

    cost2 = np.concatenate([f, np.zeros(n)])
    status, piv2 = _run_simplex(T, basis, cost2, allowed, rule, pivot_tol, max_pivots)
    if status == UNBOUNDED:
        return LpSolution(status=INFEASIBLE, pivots=piv1 + piv2)

    # recompute the basic solution and multipliers from the original data
    Mf = np.hstack([sign[:, None] * M, np.eye(n)])
    B = Mf[:, basis]
    z = np.zeros(N + n)
    if n:
        z[basis] = np.linalg.solve(B, sign * rhs)
        pi_f = np.linalg.solve(B.T, cost2[basis])
    else:
        pi_f = np.zeros(0)
    z = np.clip(z, 0.0, None)
    y = -(sign * pi_f)

    m_ineq, m_eq = sizes[0], sizes[1]
    offs = np.cumsum([0] + sizes)
    u = z[offs[0]:offs[1]]
    v = z[offs[1]:offs[2]] - z[offs[2]:offs[3]]
    lower_duals = np.zeros(n)
    upper_duals = np.zeros(n)
    lower_duals[lo_idx] = z[offs[3]:offs[4]]
    upper_duals[hi_idx] = z[offs[4]:offs[5]]
    assert u.shape[0] == m_ineq and v.shape[0] == m_eq
    return LpSolution(status=OPTIMAL, y=y, value=float(lp.objective @ y), ineq_duals=u,
                      eq_duals=v, lower_duals=lower_duals, upper_duals=upper_duals,
                      pivots=piv1 + piv2, basis=list(basis))


def active_support(sol, tol=DEFAULTS["multiplier_tol"]):
    """Indices of inequality rows whose multiplier exceeds ``tol``."""
    if sol.status != OPTIMAL:
        raise ValueError(f"active_support needs an optimal solution, got {sol.status!r}")
    return [int(i) for i in np.flatnonzero(sol.ineq_duals > tol)]


def kkt_residuals(lp, sol):
    """Primal feasibility, stationarity and complementarity residuals of ``sol``."""
    y = sol.y
    slack = lp.G @ y - lp.h
    stat = (lp.objective - lp.G.T @ sol.ineq_duals - lp.E.T @ sol.eq_duals
            - sol.lower_duals + sol.upper_duals)
    eq = lp.E @ y - lp.d
    lo_gap = np.where(np.isfinite(lp.lower), y - lp.lower, 0.0)
    hi_gap = np.where(np.isfinite(lp.upper), lp.upper - y, 0.0)
    comp = np.concatenate([sol.ineq_duals * slack, sol.lower_duals * lo_gap,
                           sol.upper_duals * hi_gap])
    return {
        "primal_infeasibility": float(max(0.0, -slack.min(initial=0.0),
                                          np.abs(eq).max(initial=0.0),
                                          -lo_gap.min(initial=0.0), -hi_gap.min(initial=0.0))),
        "dual_infeasibility": float(max(0.0, -sol.ineq_duals.min(initial=0.0))),
        "stationarity": float(np.abs(stat).max(initial=0.0)),
        "complementarity": float(np.abs(comp).max(initial=0.0)),
        "duality_gap": float(abs(sol.value - (lp.h @ sol.ineq_duals + lp.d @ sol.eq_duals
                                              + _bound_term(lp, sol)))),
    }


def _bound_term(lp, sol):
    lo = np.where(np.isfinite(lp.lower), lp.lower, 0.0)
    hi = np.where(np.isfinite(lp.upper), lp.upper, 0.0)
    return float(lo @ sol.lower_duals - hi @ sol.upper_duals)
