"""Construction of extended dual solutions by immobile-index detection.

The driver alternates between two kinds of LPs over a simplex grid:

* restriction LPs ``min mu`` over ``(x, mu)`` whose optimal multipliers
  expose new immobile points (or prove a Slater point exists on the
  restricted index set), and
* one final LP ``min c^T x`` whose multipliers give the top-level factors.

Every level produces nonnegative factors ``V_m`` and ``L_m`` with
``U_m = V_m V_m^T``, ``W_m = V_m L_m^T``, ``D_m = L_m L_m^T``, so the
``2p x 2p`` block ``[[U_m, W_m], [W_m^T, D_m]]`` is the Gram matrix of
``V_m`` stacked over ``L_m`` and is completely positive by construction.
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from sklearn.base import BaseEstimator

from .config import GenConfig
from .dam import DataSet, run_dam, support
from .lp import INFEASIBLE, OPTIMAL, UNBOUNDED, LinearProgram, solve_lp
from .model import CopositiveProgram, constraint_matrix
from .cones import min_quad_over_simplex
from .symcore import SimplexGrid, dist_to_hull_many, simplex_grid
from .validation import CopodualError, DimensionError

log = logging.getLogger(__name__)

CONTINUE = "continue"
SLATER = "slater"

STATUS_OPTIMAL = "optimal"
STATUS_UNBOUNDED = "unbounded"
STATUS_INFEASIBLE = "infeasible"
STATUS_GAP = "gap"

# level equalities are reported against this (scaled by 1 + ||A_j||)
STATIONARITY_FLAG = 1e-6


class IterationCapError(CopodualError, RuntimeError):
    def __init__(self, msg, trace=None):
        super().__init__(msg)
        self.trace = trace or []


class GuardViolation(CopodualError, RuntimeError):
    pass


class ImmobilityError(CopodualError, RuntimeError):
    pass


class EmptyRestriction(CopodualError, ValueError):
    pass


# ---------------------------------------------------------------- solutions

def _factor(M, p, name):
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return np.zeros((p, 0))
    M = np.atleast_2d(M)
    if M.shape[0] != p:
        raise DimensionError(f"{name} must have {p} rows, got {M.shape[0]}")
    if np.any(M < 0):
        raise ValueError(f"{name} has negative entries (min {M.min():.3g})")
    return M


@dataclass(eq=False)
class ExtendedDualSolution:
    """Factored solution of the extended dual.

    ``levels[m - 1] = (V_m, L_m)`` for ``m = 1..m0``; ``final_V`` factors ``U``.
    """

    levels: list
    final_V: np.ndarray

    def __post_init__(self):
        fv = np.asarray(self.final_V, dtype=float)
        if fv.ndim != 2 and not self.levels:
            raise DimensionError("final_V must be a 2-d p x k array")
        p = fv.shape[0] if fv.ndim == 2 else np.asarray(self.levels[0][0]).shape[0]
        self.final_V = _factor(fv, p, "final_V")
        lev = []
        for m, (V, L) in enumerate(self.levels, start=1):
            V = _factor(V, p, f"V_{m}")
            L = _factor(L, p, f"L_{m}")
            if V.shape != L.shape:
                raise DimensionError(f"V_{m} and L_{m} differ in shape: {V.shape} vs {L.shape}")
            lev.append((V, L))
        self.levels = lev

    @property
    def p(self):
        return self.final_V.shape[0]

    @property
    def m0(self):
        return len(self.levels)

    def U_level(self, m):
        V = self.levels[m - 1][0]
        return V @ V.T

    def W(self, m):
        if m == 0:
            return np.zeros((self.p, self.p))
        V, L = self.levels[m - 1]
        return V @ L.T

    def D(self, m):
        L = self.levels[m - 1][1]
        return L @ L.T

    @property
    def U(self):
        return self.final_V @ self.final_V.T

    def dual_value(self, prog):
        return -float(np.sum((self.U + self.W(self.m0)) * prog.A[0])) + 0.0

    def min_factor_entry(self):
        mats = [self.final_V] + [M for pair in self.levels for M in pair]
        return float(min((M.min() for M in mats if M.size), default=0.0))

    def to_dict(self):
        return {"m0": self.m0,
                "levels": [{"V": V.tolist(), "L": L.tolist()} for V, L in self.levels],
                "final_V": self.final_V.tolist(), "p": self.p}

    @classmethod
    def from_dict(cls, data):
        p = int(data["p"])
        levels = [(np.asarray(lv["V"], dtype=float).reshape(p, -1),
                   np.asarray(lv["L"], dtype=float).reshape(p, -1)) for lv in data["levels"]]
        if len(levels) != int(data.get("m0", len(levels))):
            raise DimensionError("m0 does not match the number of levels")
        return cls(levels, np.asarray(data["final_V"], dtype=float).reshape(p, -1))


# ---------------------------------------------------------------- state

@dataclass(frozen=True, eq=False)
class IterationState:
    """Everything known at the start of iteration ``m``.

    ``taus``/``gammas``/``origins`` describe ``I_m``; ``lambdas`` is
    ``lambda^{m-1}`` over ``I_{m-1}`` (the first rows of ``taus``);
    ``betas`` are the weights used to build ``V_m``.
    """

    p: int
    m: int = 0
    taus: np.ndarray = None
    gammas: np.ndarray = None
    origins: tuple = ()
    lambdas: np.ndarray = None
    betas: np.ndarray = None
    V_levels: tuple = ()
    L_levels: tuple = ()
    level_supports: tuple = ()
    epsilon: float = None

    def __post_init__(self):
        p = self.p
        for name in ("taus", "lambdas"):
            if getattr(self, name) is None:
                object.__setattr__(self, name, np.zeros((0, p)))
        for name in ("gammas", "betas"):
            if getattr(self, name) is None:
                object.__setattr__(self, name, np.zeros(0))

    @property
    def size(self):
        return self.taus.shape[0]

    def level_taus(self, s):
        """Points of ``I_{s+1} minus I_s``, i.e. the ones found at iteration ``s``."""
        idx = [i for i, o in enumerate(self.origins) if o == s]
        return self.taus[idx]


def initial_state(prog):
    return IterationState(p=prog.p)


@dataclass
class IterationOutcome:
    kind: str
    state: IterationState = None
    x: np.ndarray = None
    mu: float = np.nan
    epsilon: float = None
    attempts: int = 0
    record: dict = field(default_factory=dict)


# ---------------------------------------------------------------- LP rows

def _quad_table(prog, points):
    """``t^T A_j t`` for every point (rows) and j = 0..n (columns)."""
    return np.einsum("ti,jik,tk->tj", points, prog.stacked, points)


def _tau_rows(prog, taus):
    """Rows of ``A(x) tau >= 0``: coefficients on x and right-hand sides."""
    if taus.shape[0] == 0:
        return np.zeros((0, prog.n)), np.zeros(0)
    # prods[i, j, k] = (A_j tau_i)_k
    prods = np.einsum("jkl,il->ijk", prog.stacked, taus)
    G = prods[:, 1:, :].transpose(0, 2, 1).reshape(-1, prog.n)
    h = -prods[:, 0, :].reshape(-1)
    return G, h


def _default_eps(cfg, grid):
    return cfg.eps_init if cfg.eps_init is not None else 4.0 * grid.cell_diameter


def _filtered(grid, taus, eps):
    """Indices of grid points at distance >= eps from conv(taus)."""
    if taus.shape[0] == 0:
        return np.arange(len(grid))
    d = dist_to_hull_many(grid.points, taus)
    return np.flatnonzero(d >= eps)


def restriction_problem(prog, state, grid, eps=None, cfg=None, allow_empty=False):
    """The LP ``min mu`` over ``(x, mu)`` at the current level.

    Rows come in two blocks: ``p`` rows ``A(x) tau(i) >= 0`` for each known
    immobile point, then one row ``t^T A(x) t + mu >= 0`` per grid point at
    distance at least ``eps`` from their hull.
    """
    cfg = cfg or GenConfig()
    if grid.p != prog.p:
        raise DimensionError("grid dimension does not match the program")
    if eps is None:
        eps = state.epsilon if state.epsilon is not None else _default_eps(cfg, grid)
    idx = _filtered(grid, state.taus, eps)
    if idx.size == 0 and not allow_empty:
        raise EmptyRestriction(f"no grid point at distance >= {eps:.3g} from the known hull")
    Gt, ht = _tau_rows(prog, state.taus)
    Q = _quad_table(prog, grid.points[idx])
    G = np.vstack([np.hstack([Gt, np.zeros((Gt.shape[0], 1))]),
                   np.hstack([Q[:, 1:], np.ones((idx.size, 1))])])
    h = np.concatenate([ht, -Q[:, 0]])
    n = prog.n
    obj = np.zeros(n + 1)
    obj[-1] = 1.0
    lower = np.full(n + 1, -np.inf)
    upper = np.full(n + 1, np.inf)
    lower[-1], upper[-1] = -cfg.mu_bound, cfg.mu_bound
    return LinearProgram(obj, G, h, lower=lower, upper=upper)


def _primal_lp(prog, points, taus, box=None):
    """``min c^T x`` subject to the tau rows and ``t^T A(x) t >= 0`` on ``points``."""
    Gt, ht = _tau_rows(prog, taus)
    Q = _quad_table(prog, points)
    G = np.vstack([Gt, Q[:, 1:]])
    h = np.concatenate([ht, -Q[:, 0]])
    lo = hi = None
    if box is not None:
        lo, hi = np.full(prog.n, -box), np.full(prog.n, box)
    return LinearProgram(np.asarray(prog.c, dtype=float), G, h, lower=lo, upper=hi)


# ---------------------------------------------------------------- immobility

def immobility_margin(prog, tau, grid, cfg=None, known_immobile=None):
    """``max tau^T A(x) tau`` over the grid relaxation of the feasible set.

    The relaxation keeps every grid row, the rows ``A(x) tau' >= 0`` for
    already verified points ``tau'`` and the box ``|x_j| <= box_radius``.
    Returns ``(value, x_hat)``; ``value`` is ``nan`` if the relaxation is
    infeasible.
    """
    cfg = cfg or GenConfig()
    tau = np.asarray(tau, dtype=float)
    known = np.zeros((0, prog.p)) if known_immobile is None else \
        np.atleast_2d(np.asarray(known_immobile, dtype=float)).reshape(-1, prog.p)
    q = np.einsum("i,jik,k->j", tau, prog.stacked, tau)
    lp = _primal_lp(prog, grid.points, known, box=cfg.box_radius)
    lp.objective = -q[1:]
    sol = solve_lp(lp, cfg.lp_rule)
    if sol.status == UNBOUNDED:
        raise CopodualError("immobility probe unbounded despite the box; check box_radius")
    if sol.status != OPTIMAL:
        return np.nan, None
    return float(q[0] - sol.value), sol.y


def verify_immobile(prog, tau, grid, cfg=None, known_immobile=None):
    """True if ``tau^T A(x) tau`` cannot be made positive on the grid relaxation."""
    cfg = cfg or GenConfig()
    value, x_hat = immobility_margin(prog, tau, grid, cfg, known_immobile)
    if not np.isfinite(value):
        return False
    ok = value <= cfg.cop_tol
    if ok:
        # an immobile point has A(x) tau >= 0 on feasible x; sample the probe optimum
        row = constraint_matrix(prog, x_hat) @ np.asarray(tau, dtype=float)
        if row.min() < -cfg.cop_tol * (1.0 + np.abs(x_hat).max(initial=0.0)):
            log.info("A(x) tau has a negative entry %.3g at the probe point", row.min())
    return bool(ok)


# ---------------------------------------------------------------- iteration

def _level_residuals(prog, U, W):
    S = U + W
    vals = np.einsum("ik,jik->j", S, prog.stacked) if S.size else np.zeros(prog.n + 1)
    scale = 1.0 + np.abs(prog.stacked).reshape(prog.n + 1, -1).max(axis=1)
    return vals, scale


def iterate(prog, state, cfg=None, grid=None, eps=None, attempts=0):
    """Run iteration ``state.m``: solve the restriction LP and extend the state.

    Returns an :class:`IterationOutcome` of kind ``continue`` (new state),
    ``slater`` (a restricted Slater point was found) or ``infeasible``.
    """
    cfg = cfg or GenConfig()
    grid = grid or simplex_grid(prog.p, cfg.grid)
    m, p = state.m, prog.p
    eps = _default_eps(cfg, grid) if eps is None else eps
    n_tau_rows = state.size * p
    while True:
        if m > 0 and _filtered(grid, state.taus, eps).size == 0 and attempts < cfg.max_retries:
            eps *= cfg.eps_shrink
            attempts += 1
            continue
        idx = _filtered(grid, state.taus, eps)
        lp = restriction_problem(prog, state, grid, eps, cfg, allow_empty=True)
        sol = solve_lp(lp, cfg.lp_rule)
        record = {"level": m, "epsilon": float(eps), "attempts": attempts, "grid_rows": int(idx.size)}
        if sol.status != OPTIMAL:
            # mu is boxed, so a non-optimal restriction means no x satisfies the rows
            record.update(outcome=STATUS_INFEASIBLE, lp_status=sol.status)
            return IterationOutcome(STATUS_INFEASIBLE, epsilon=eps, attempts=attempts,
                                    record=record)
        mu = float(sol.y[-1]) + 0.0
        record["mu"] = mu
        if mu < -cfg.mu_threshold:
            record["outcome"] = SLATER
            return IterationOutcome(SLATER, state=state, x=sol.y[:-1].copy(), mu=mu,
                                    epsilon=eps, attempts=attempts, record=record)
        if mu > cfg.mu_threshold:
            record["outcome"] = STATUS_INFEASIBLE
            return IterationOutcome(STATUS_INFEASIBLE, mu=mu, epsilon=eps, attempts=attempts,
                                    record=record)

        u = sol.ineq_duals[n_tau_rows:]
        sel = np.flatnonzero(u > cfg.multiplier_tol)
        if sel.size == 0:
            raise CopodualError("restriction LP at mu = 0 has no positive grid multiplier")
        scale = u[sel].sum()
        gamma_new = u[sel] / scale
        lam_hat = np.clip(sol.ineq_duals[:n_tau_rows].reshape(state.size, p), 0.0, None) / scale
        new_taus = grid.points[idx[sel]].copy()
        record.update(delta_size=int(sel.size), gamma_sum=float(gamma_new.sum()))

        # lambda^m = lambda^{m-1} + lambda_hat on I_{m-1}, lambda_hat on the rest of I_m
        lam = lam_hat.copy()
        lam[: state.lambdas.shape[0]] += state.lambdas
        dam_steps = 0
        hull_flags = []
        if m > 0:
            data = DataSet(new_taus, gamma_new, state.taus, lam, state.gammas)
            data, info = run_dam(data, return_info=True)
            new_taus, gamma_new = np.array(data.delta_taus), np.array(data.delta_gammas)
            lam, base_gammas = np.array(data.base_lambdas), np.array(data.base_gammas)
            dam_steps, hull_flags = info.steps, info.hull_flags
        else:
            base_gammas = state.gammas
        record.update(dam_steps=dam_steps, hull_flags=hull_flags)

        failed = [k for k, t in enumerate(new_taus)
                  if not verify_immobile(prog, t, grid, cfg, state.taus)]
        if failed:
            record["failed_immobility"] = failed
            if attempts >= cfg.max_retries:
                raise ImmobilityError(f"level {m}: extracted points {failed} are not immobile "
                                      f"after {attempts} retries")
            log.info("level %d: %d points failed the immobility check, shrinking eps",
                     m, len(failed))
            eps *= cfg.eps_shrink
            attempts += 1
            continue

        taus = np.vstack([state.taus, new_taus])
        gammas = np.concatenate([base_gammas, gamma_new])
        betas = np.sqrt(gammas)
        V_next = taus.T * betas
        L_levels = state.L_levels
        if m > 0:
            L_levels = L_levels + ((lam / state.betas[:, None]).T,)
        W_m = state.V_levels[-1] @ L_levels[-1].T if m > 0 else np.zeros((p, p))
        vals, sc = _level_residuals(prog, V_next @ V_next.T, W_m)
        record["residuals"] = np.abs(vals).tolist()
        if np.any(np.abs(vals) > STATIONARITY_FLAG * sc):
            log.warning("level %d equality residual %.3g exceeds %.1g", m,
                        np.abs(vals).max(), STATIONARITY_FLAG)
        supports = [sorted(support(t)) for t in new_taus]
        record["supports"] = supports
        record["outcome"] = CONTINUE
        new_state = IterationState(
            p=p, m=m + 1, taus=taus, gammas=gammas,
            origins=state.origins + (m,) * new_taus.shape[0], lambdas=lam, betas=betas,
            V_levels=state.V_levels + (V_next,), L_levels=L_levels,
            level_supports=state.level_supports + (tuple(map(tuple, supports)),),
            epsilon=eps)
        return IterationOutcome(CONTINUE, state=new_state, mu=mu, epsilon=eps,
                                attempts=attempts, record=record)


def check_level_guard(state):
    """Supports of points found at different levels must all differ."""
    levels = [set(map(frozenset, s)) for s in state.level_supports]
    for a in range(len(levels)):
        for b in range(a + 1, len(levels)):
            shared = levels[a] & levels[b]
            if shared:
                raise GuardViolation(f"levels {a} and {b} share the support "
                                     f"{sorted(next(iter(shared)))}")
    # condition (no earlier support inside a later one) after data modification
    for b in range(1, len(levels)):
        for a in range(b):
            for sa in levels[a]:
                for sb in levels[b]:
                    if sa <= sb:
                        raise GuardViolation(f"support {sorted(sa)} of level {a} lies inside "
                                             f"support {sorted(sb)} of level {b}")


# ---------------------------------------------------------------- final step

@dataclass
class FinalStep:
    status: str
    solution: ExtendedDualSolution = None
    x: np.ndarray = None
    value: float = np.nan
    complementarity: list = field(default_factory=list)
    support_size: int = 0


def final_step(prog, state, cfg=None, grid=None, eps=None):
    """Solve ``min c^T x`` on the restricted index set and assemble the dual."""
    cfg = cfg or GenConfig()
    grid = grid or simplex_grid(prog.p, cfg.grid)
    if eps is None:
        eps = state.epsilon if state.epsilon is not None else _default_eps(cfg, grid)
    idx = _filtered(grid, state.taus, eps)
    pts = grid.points[idx]
    lp = _primal_lp(prog, pts, state.taus)
    sol = solve_lp(lp, cfg.lp_rule)
    if sol.status != OPTIMAL:
        return FinalStep(status=sol.status)
    p, k = prog.p, state.size
    n_tau_rows = k * p
    u = sol.ineq_duals[n_tau_rows:]
    sel = np.flatnonzero(u > cfg.multiplier_tol)
    final_taus, gam = pts[sel], u[sel]
    final_V = final_taus.T * np.sqrt(gam)
    lam = np.clip(sol.ineq_duals[:n_tau_rows].reshape(k, p), 0.0, None)
    levels = [(V, L) for V, L in zip(state.V_levels[:-1], state.L_levels)]
    if state.m > 0:
        levels.append((state.V_levels[-1], (lam / state.betas[:, None]).T))
    dual = ExtendedDualSolution(levels, final_V if final_V.size else np.zeros((p, 0)))
    Ax = constraint_matrix(prog, sol.y)
    comp = [float(t @ Ax @ t) for t in final_taus]
    comp += [float(l @ Ax @ t) for l, t in zip(lam, state.taus)]
    return FinalStep(status=OPTIMAL, solution=dual, x=sol.y + 0.0, value=sol.value + 0.0,
                     complementarity=comp, support_size=int(sel.size))


# ---------------------------------------------------------------- driver

@dataclass
class DualBuild:
    status: str
    m0: int = None
    solution: ExtendedDualSolution = None
    x: np.ndarray = None
    primal_value: float = np.nan
    dual_value: float = np.nan
    gap: float = np.nan
    slater: bool = None
    immobile: list = field(default_factory=list)
    trace: list = field(default_factory=list)
    isolated: bool = False
    primal_violation: float = np.nan
    exchange_points: list = field(default_factory=list)

    def to_dict(self):
        def f(v):
            return None if v is None or (isinstance(v, float) and not np.isfinite(v)) else v
        return {"status": self.status, "m0": self.m0,
                "x": None if self.x is None else self.x.tolist(),
                "primal_value": f(self.primal_value), "dual_value": f(self.dual_value),
                "gap": f(self.gap), "slater": self.slater,
                "immobile": [lv.tolist() for lv in self.immobile],
                "solution": None if self.solution is None else self.solution.to_dict(),
                "isolated_indices": self.isolated,
                "primal_violation": f(self.primal_violation),
                "exchange_points": self.exchange_points, "trace": self.trace}


def _level_cap(prog, cfg):
    cap = 2 ** prog.p - 1
    return cap if cfg.max_iters is None else min(cap, cfg.max_iters)


def _immobile_levels(state):
    return [state.level_taus(s) for s in range(state.m)]


def find_immobile(prog, cfg=None, grid=None):
    """Run iterations until a restricted Slater point appears.

    Returns ``(status, levels, slater)`` where ``levels`` lists the immobile
    points found at each iteration and ``slater`` says whether the very first
    restriction already had a Slater point.
    """
    cfg = cfg or GenConfig()
    grid = grid or simplex_grid(prog.p, cfg.grid)
    state, trace = initial_state(prog), []
    cap = _level_cap(prog, cfg)
    while True:
        out = iterate(prog, state, cfg, grid)
        trace.append(out.record)
        if out.kind == STATUS_INFEASIBLE:
            return STATUS_INFEASIBLE, _immobile_levels(state), None, trace
        if out.kind == SLATER:
            return STATUS_OPTIMAL, _immobile_levels(state), state.m == 0, trace
        state = out.state
        check_level_guard(state)
        if state.m > cap:
            raise IterationCapError(f"more than {cap} levels", trace)


def build_dual(prog, cfg=None, grid=None):
    """Build an extended dual solution and a primal point with matching values.

    The index set is the simplex grid, enlarged by exchange points: after
    each build the primal point is checked with the refined copositivity
    oracle and, if some simplex point violates its constraint by more than
    ``cop_tol``, that point joins the index set and the build is repeated
    (at most ``exchange_rounds`` times).
    """
    if not isinstance(prog, CopositiveProgram):
        raise TypeError("build_dual expects a CopositiveProgram")
    cfg = cfg or GenConfig()
    base = grid or simplex_grid(prog.p, cfg.grid)
    grid, added = base, []
    for rnd in range(cfg.exchange_rounds + 1):
        result = _build_on(prog, cfg, grid)
        if result.status != STATUS_OPTIMAL:
            break
        val, t = min_quad_over_simplex(constraint_matrix(prog, result.x), base,
                                       cfg.refine_rounds)
        result.primal_violation = max(0.0, -val)
        if val >= -cfg.cop_tol or rnd == cfg.exchange_rounds:
            break
        if np.any(np.max(np.abs(grid.points - t), axis=1) < 1e-12):
            break
        added.append(t)
        log.info("exchange round %d: adding point with violation %.3g", rnd + 1, -val)
        grid = SimplexGrid(base.p, base.k, np.vstack([base.points, np.array(added)]))
    result.exchange_points = [t.tolist() for t in added]
    return result


def _build_on(prog, cfg, grid):
    cap = _level_cap(prog, cfg)
    state, trace = initial_state(prog), []
    slater0 = None
    eps, attempts = None, 0
    while True:
        out = iterate(prog, state, cfg, grid, eps, attempts)
        trace.append(out.record)
        if state.m == 0:
            slater0 = out.kind == SLATER
        if out.kind == STATUS_INFEASIBLE:
            return DualBuild(STATUS_INFEASIBLE, slater=slater0, trace=trace,
                             immobile=_immobile_levels(state))
        if out.kind == CONTINUE:
            state = out.state
            check_level_guard(state)
            if state.m > cap:
                raise IterationCapError(f"more than {cap} levels without a Slater point", trace)
            eps, attempts = None, 0
            continue

        # restricted Slater point at level m0 = state.m
        state = replace(state, epsilon=out.epsilon)
        ref = solve_lp(_primal_lp(prog, grid.points, state.taus), cfg.lp_rule)
        if ref.status in (UNBOUNDED, INFEASIBLE):
            trace.append({"final": {"status": ref.status}})
            return DualBuild(ref.status, m0=state.m, slater=slater0, trace=trace,
                             immobile=_immobile_levels(state))
        fin = final_step(prog, state, cfg, grid, out.epsilon)
        gap = ref.value - fin.value if fin.status == OPTIMAL else np.inf
        gap_ok = abs(gap) <= cfg.gap_tol * (1.0 + abs(ref.value))
        final_rec = {"status": fin.status, "epsilon": float(out.epsilon), "reference": ref.value,
                     "value": None if fin.status != OPTIMAL else fin.value,
                     "gap": None if not np.isfinite(gap) else gap,
                     "support_size": fin.support_size,
                     "complementarity": fin.complementarity}
        trace.append({"final": final_rec})
        if not gap_ok and state.m > 0 and out.attempts < cfg.max_retries:
            log.info("level %d: final gap %.3g, shrinking eps", state.m, gap)
            eps, attempts = out.epsilon * cfg.eps_shrink, out.attempts + 1
            continue
        if fin.status != OPTIMAL:
            return DualBuild(STATUS_GAP, m0=state.m, slater=slater0, trace=trace,
                             immobile=_immobile_levels(state), x=ref.y,
                             primal_value=ref.value)
        sol = fin.solution
        dual_value = sol.dual_value(prog)
        dam_counts = [r.get("dam_steps", 0) for r in trace if "dam_steps" in r]
        isolated = state.m > 1 and all(c == 0 for c in dam_counts)
        if isolated:
            log.info("isolated immobile indices: data modification never changed the data")
        return DualBuild(STATUS_OPTIMAL if gap_ok else STATUS_GAP, m0=state.m, solution=sol,
                         x=ref.y + 0.0, primal_value=float(ref.value) + 0.0, dual_value=dual_value,
                         gap=float(ref.value - dual_value), slater=slater0,
                         immobile=_immobile_levels(state), trace=trace, isolated=isolated)


class ExtendedDualBuilder(BaseEstimator):
    """Estimator-style front end to :func:`build_dual`.

    ``fit`` takes a :class:`CopositiveProgram` in place of a data matrix.
    """

    def __init__(self, grid=16, refine_rounds=3, mu_threshold=1e-7, eps_init=None,
                 eps_shrink=0.5, max_retries=6, box_radius=1e3, max_iters=None,
                 gap_tol=1e-6, multiplier_tol=1e-9, cop_tol=1e-7, lp_rule="bland",
                 exchange_rounds=20):
        self.grid = grid
        self.refine_rounds = refine_rounds
        self.mu_threshold = mu_threshold
        self.eps_init = eps_init
        self.eps_shrink = eps_shrink
        self.max_retries = max_retries
        self.box_radius = box_radius
        self.max_iters = max_iters
        self.gap_tol = gap_tol
        self.multiplier_tol = multiplier_tol
        self.cop_tol = cop_tol
        self.lp_rule = lp_rule
        self.exchange_rounds = exchange_rounds

    def _config(self):
        return GenConfig(**self.get_params())

    def fit(self, program, y=None):
        result = build_dual(program, self._config())
        self.result_ = result
        self.status_ = result.status
        self.m0_ = result.m0
        self.dual_ = result.solution
        self.x_ = result.x
        self.primal_value_ = result.primal_value
        self.dual_value_ = result.dual_value
        self.gap_ = result.gap
        self.immobile_ = result.immobile
        self.trace_ = result.trace
        return self

    def score(self, program, y=None):
        """Negative absolute duality gap of the fitted solution on ``program``."""
        if not hasattr(self, "dual_") or self.dual_ is None:
            raise CopodualError("no dual solution; fit first")
        return -abs(float(np.asarray(program.c) @ self.x_) - self.dual_.dual_value(program))
