"""Copositive and PSD membership tests, completely positive factor certificates.

Copositivity is decided on the simplex: a symmetric ``D`` is copositive iff
``min_{t in T} t^T D t >= 0``.  The minimum is estimated on a simplex grid,
then refined around the best grid points.  Completely positive matrices are
never tested, only built from nonnegative factors.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULTS
from .symcore import SimplexGrid, min_eigenvalue, quad_forms, simplex_grid
from .validation import DimensionError, check_nonnegative, check_symmetric

COPOSITIVE = "copositive"
NOT_COPOSITIVE = "not_copositive"
INCONCLUSIVE = "inconclusive"

_LOCAL_RESOLUTION_CAP = 16


@dataclass
class CopositivityVerdict:
    status: str
    min_value: float
    witness: np.ndarray
    history: list = field(default_factory=list)
    stabilized: bool = False

    def to_dict(self):
        return {"status": self.status, "min_value": self.min_value,
                "witness": self.witness.tolist(), "history": list(self.history),
                "stabilized": self.stabilized}


def _evaluate(D, pts, n_jobs=1):
    if n_jobs <= 1 or pts.shape[0] < 20000:
        return quad_forms(D, pts)
    chunks = np.array_split(pts, n_jobs)
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        parts = list(pool.map(lambda c: quad_forms(D, c), chunks))
    return np.concatenate(parts)


def _face_polish(D, t):
    """Stationary point of ``t^T D t`` on the face spanned by supp(t), or None."""
    S = np.flatnonzero(t > 1e-12)
    m = S.size
    K = np.zeros((m + 1, m + 1))
    K[:m, :m] = D[np.ix_(S, S)]
    K[:m, m] = -1.0
    K[m, :m] = 1.0
    rhs = np.zeros(m + 1)
    rhs[m] = 1.0
    sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    tS = sol[:m]
    if np.any(tS < 0) or abs(tS.sum() - 1.0) > 1e-9:
        return None
    out = np.zeros_like(t)
    out[S] = tS / tS.sum()
    return out


def _best_distinct(values, pts, q):
    order = np.argsort(values, kind="stable")
    chosen = []
    for idx in order:
        if all(np.max(np.abs(pts[idx] - pts[c])) > 1e-14 for c in chosen):
            chosen.append(idx)
        if len(chosen) == q:
            break
    return chosen


def _min_quad_history(D, grid, refine_rounds, q, n_jobs):
    vals = _evaluate(D, grid.points, n_jobs)
    best = int(np.argmin(vals))
    best_val, best_pt = float(vals[best]), grid.points[best].copy()
    history = [best_val]
    centers = [grid.points[i].copy() for i in _best_distinct(vals, grid.points, q)]

    k_loc = min(grid.k, _LOCAL_RESOLUTION_CAP)
    local = simplex_grid(grid.p, k_loc).points
    alpha = min(1.0, 2.0 * grid.p / grid.k)
    for _ in range(refine_rounds):
        cand_pts, cand_vals = [], []
        for c in centers:
            pts = c + alpha * (local - c)
            v = _evaluate(D, pts, n_jobs)
            for i in _best_distinct(v, pts, q):
                cand_pts.append(pts[i])
                cand_vals.append(v[i])
                polished = _face_polish(D, pts[i])
                if polished is not None:
                    cand_pts.append(polished)
                    cand_vals.append(float(polished @ D @ polished))
        cand_pts = np.array(cand_pts)
        cand_vals = np.array(cand_vals)
        i = int(np.argmin(cand_vals))
        if cand_vals[i] < best_val:
            best_val, best_pt = float(cand_vals[i]), cand_pts[i].copy()
        history.append(best_val)
        centers = [cand_pts[j] for j in _best_distinct(cand_vals, cand_pts, q)]
        alpha /= 2.0
    return best_val, best_pt, history


def min_quad_over_simplex(D, grid, refine_rounds=DEFAULTS["refine_rounds"],
                          q=DEFAULTS["refine_points"], n_jobs=1):
    """Estimate ``min_{t in T} t^T D t`` from above.

    Returns the best value found and the simplex point attaining it.  Every
    reported value is attained by the returned point, so it is an upper
    bound on the true minimum.
    """
    D = check_symmetric(D, "D")
    if not isinstance(grid, SimplexGrid):
        raise TypeError("grid must be a SimplexGrid")
    if grid.p != D.shape[0]:
        raise DimensionError(f"grid dimension {grid.p} != matrix dimension {D.shape[0]}")
    if refine_rounds < 0:
        raise ValueError("refine_rounds must be nonnegative")
    val, pt, _ = _min_quad_history(D, grid, refine_rounds, q, n_jobs)
    return val, pt


def is_copositive(D, tol=DEFAULTS["cop_tol"], grid_resolution=DEFAULTS["grid"],
                  refine_rounds=DEFAULTS["refine_rounds"], n_jobs=1):
    if not tol > 0:
        raise ValueError("tol must be positive")
    D = check_symmetric(D, "D")
    grid = simplex_grid(D.shape[0], grid_resolution)
    val, pt, history = _min_quad_history(D, grid, refine_rounds, DEFAULTS["refine_points"],
                                         n_jobs)
    stabilized = len(history) >= 2 and abs(history[-1] - history[-2]) < tol / 10
    if val < -tol:
        status = NOT_COPOSITIVE
    elif stabilized:
        status = COPOSITIVE
    else:
        status = INCONCLUSIVE
    return CopositivityVerdict(status=status, min_value=val, witness=pt, history=history,
                               stabilized=stabilized)


def is_psd(Q, tol=1e-9):
    if not tol > 0:
        raise ValueError("tol must be positive")
    Q = check_symmetric(Q, "Q")
    return min_eigenvalue(Q) >= -tol


@dataclass(frozen=True, eq=False)
class CpFactor:
    """Nonnegative ``p x k`` factor ``B``; ``B B^T`` is completely positive."""

    B: np.ndarray

    def __post_init__(self):
        B = check_nonnegative(self.B, "CpFactor.B")
        if B.shape[0] < 1 or B.shape[1] < 1:
            raise DimensionError("CpFactor needs at least one row and one column")
        object.__setattr__(self, "B", B)

    @property
    def p(self):
        return self.B.shape[0]

    @property
    def width(self):
        return self.B.shape[1]

    def gram(self):
        G = self.B @ self.B.T
        return (G + G.T) / 2.0


def cp_gram(F):
    return F.gram()


def cp_block(V, L):
    """Gram matrix of ``V`` stacked over ``L``: ``[[VV^T, VL^T], [LV^T, LL^T]]``."""
    V = np.atleast_2d(np.asarray(V, dtype=float))
    L = np.atleast_2d(np.asarray(L, dtype=float))
    if V.shape != L.shape:
        raise DimensionError(f"V and L must have the same shape, got {V.shape} and {L.shape}")
    return CpFactor(np.vstack([V, L])).gram()
