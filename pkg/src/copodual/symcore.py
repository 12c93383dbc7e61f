"""Dense symmetric-matrix arithmetic, simplex geometry and simplex grids."""

from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .config import DEFAULTS
from .validation import DimensionError, check_simplex_point, check_square, check_vector


class GridTooFineError(ValueError):
    pass


def trace_inner(A, B):
    """Trace inner product ``A . B = trace(A B)`` of two symmetric matrices."""
    A = check_square(A, "A")
    B = check_square(B, "B")
    if A.shape != B.shape:
        raise DimensionError(f"dimension mismatch: {A.shape} vs {B.shape}")
    # entrywise form is exactly symmetric in its arguments
    return float(np.sum(A * B))


def quad_form(D, t):
    D = check_square(D, "D")
    t = check_vector(t, D.shape[0], "t")
    return float(t @ D @ t)


def quad_forms(D, points):
    """``t^T D t`` for every row ``t`` of ``points``."""
    points = np.asarray(points, dtype=float)
    return np.einsum("ij,jk,ik->i", points, D, points)


@lru_cache(maxsize=64)
def _compositions(k, p):
    if p == 1:
        return np.array([[k]], dtype=np.int64)
    blocks = []
    for first in range(k, -1, -1):
        rest = _compositions(k - first, p - 1)
        blocks.append(np.hstack([np.full((rest.shape[0], 1), first, dtype=np.int64), rest]))
    return np.vstack(blocks)


@dataclass(frozen=True, eq=False)
class SimplexGrid:
    """All points of the unit simplex whose coordinates are multiples of ``1/k``.

    Points are ordered lexicographically with the first coordinate
    decreasing, so ``(1, 0, ..., 0)`` comes first.
    """

    p: int
    k: int
    points: np.ndarray

    def __len__(self):
        return self.points.shape[0]

    @property
    def cell_diameter(self):
        return np.sqrt(2.0) / self.k


def simplex_grid(p, k, cap=DEFAULTS["grid_cap"]):
    if p < 1 or k < 1:
        raise ValueError("simplex_grid needs p >= 1 and k >= 1")
    count = comb(k + p - 1, p - 1)
    if count > cap:
        raise GridTooFineError(f"grid (p={p}, k={k}) has {count} points, cap is {cap}")
    pts = _compositions(k, p).astype(float) / k
    pts.setflags(write=False)
    return SimplexGrid(p=p, k=k, points=pts)


def max_eigenvalue(Q):
    Q = check_square(Q, "Q")
    return float(np.linalg.eigvalsh((Q + Q.T) / 2.0)[-1])


def min_eigenvalue(Q):
    Q = check_square(Q, "Q")
    return float(np.linalg.eigvalsh((Q + Q.T) / 2.0)[0])


def _affine_minimizer(Q):
    """Coefficients (summing to one) of the min-norm point of aff(rows of Q)."""
    m = Q.shape[0]
    K = np.zeros((m + 1, m + 1))
    K[:m, :m] = Q @ Q.T
    K[:m, m] = 1.0
    K[m, :m] = 1.0
    rhs = np.zeros(m + 1)
    rhs[m] = 1.0
    sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    return sol[:m]


def _min_norm_point(Q, gap_tol=1e-15, max_iter=500):
    """Wolfe's nearest-point algorithm: min ||x|| over conv(rows of Q)."""
    norms = np.einsum("ij,ij->i", Q, Q)
    scale = max(1.0, float(norms.max()))
    S = [int(np.argmin(norms))]
    w = np.array([1.0])
    x = Q[S[0]].copy()
    for _ in range(max_iter):
        g = Q @ x
        j = int(np.argmin(g))
        if x @ x - g[j] <= gap_tol * scale or j in S:
            break
        S.append(j)
        w = np.append(w, 0.0)
        while True:
            alpha = _affine_minimizer(Q[S])
            if np.all(alpha > 1e-12):
                w = alpha
                break
            mask = (alpha <= 1e-12) & (w - alpha > 0)
            theta = np.min(w[mask] / (w[mask] - alpha[mask])) if np.any(mask) else 1.0
            w = theta * alpha + (1.0 - theta) * w
            keep = w > 1e-12
            if not np.any(keep):
                keep[int(np.argmax(w))] = True
            S = [s for s, k in zip(S, keep) if k]
            w = w[keep] / w[keep].sum()
        x = w @ Q[S]
    return float(np.sqrt(max(x @ x, 0.0)))


def _segment_distance(t, a, b):
    d = b - a
    dd = d @ d
    if dd == 0.0:
        return float(np.linalg.norm(t - a))
    s = np.clip((t - a) @ d / dd, 0.0, 1.0)
    return float(np.linalg.norm(t - a - s * d))


def dist_to_hull(t, hull_points):
    """Euclidean distance from ``t`` to the convex hull of ``hull_points``.

    Closed form for one or two hull points; Wolfe's nearest-point
    iteration otherwise (stopped at a 1e-15 relative Frank-Wolfe gap, since
    the gap bounds the squared distance).
    """
    t = check_vector(t, name="t")
    H = np.atleast_2d(np.asarray(hull_points, dtype=float))
    if H.size == 0 or H.shape[0] == 0:
        raise ValueError("hull_points must be nonempty")
    if H.shape[1] != t.shape[0]:
        raise DimensionError("hull points and t differ in dimension")
    if H.shape[0] == 1:
        return float(np.linalg.norm(t - H[0]))
    if H.shape[0] == 2:
        return _segment_distance(t, H[0], H[1])
    return _min_norm_point(H - t)


def dist_to_hull_many(points, hull_points):
    """Vectorised :func:`dist_to_hull` over the rows of ``points``."""
    P = np.asarray(points, dtype=float)
    H = np.atleast_2d(np.asarray(hull_points, dtype=float))
    if H.shape[0] == 0:
        raise ValueError("hull_points must be nonempty")
    if H.shape[0] == 1:
        return np.linalg.norm(P - H[0], axis=1)
    if H.shape[0] == 2:
        a, d = H[0], H[1] - H[0]
        dd = d @ d
        if dd == 0.0:
            return np.linalg.norm(P - a, axis=1)
        s = np.clip((P - a) @ d / dd, 0.0, 1.0)
        return np.linalg.norm(P - a - s[:, None] * d, axis=1)
    return np.array([_min_norm_point(H - t) for t in P])


def as_simplex_point(t, p=None):
    return check_simplex_point(t, p)
