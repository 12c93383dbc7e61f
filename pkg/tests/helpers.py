"""Random program generators shared by the test modules."""

import numpy as np

from copodual.model import CopositiveProgram
from copodual.symcore import simplex_grid


def rand_sym(rng, p, scale=1.0):
    B = rng.standard_normal((p, p)) * scale
    return (B + B.T) / 2.0


def planted_program(rng, p, n, edge=False, with_psd=False):
    """Copositive program with planted immobile vertices (and optionally an edge).

    Returns ``(prog, K, pair)``, plus the PSD part of ``A_0`` when
    ``with_psd`` is set.

    The constant term is PSD plus nonnegative, so ``x = 0`` is feasible; the
    objective is a positive combination of grid quadratic forms, so the
    program is bounded below.  Vertices ``e_k`` for ``k`` in the planted set
    have ``A_j[k, k] = 0`` for all ``j`` and are immobile.
    """
    size = int(rng.integers(1, p))
    K = np.sort(rng.choice(p, size=size, replace=False))
    pair = tuple(K[:2]) if edge and size >= 2 else None
    mats = []
    for _ in range(n):
        A = rand_sym(rng, p)
        A[K, K] = 0.0
        if pair:
            A[pair], A[pair[::-1]] = 0.0, 0.0
        mats.append(A)
    M = rng.standard_normal((p, p))
    M[K] = 0.0
    N = rng.random((p, p)) + 0.1
    N = (N + N.T) / 2.0
    N[K, K] = 0.0
    if pair:
        N[pair], N[pair[::-1]] = 0.0, 0.0
    A0 = M @ M.T + N
    grid = simplex_grid(p, 16).points
    inner = grid[np.all(grid > 0, axis=1)]
    pts = inner[rng.choice(len(inner), size=n + 1, replace=False)]
    w = rng.random(n + 1) + 0.1
    c = np.array([np.sum(w * np.einsum("ti,ik,tk->t", pts, A, pts)) for A in mats])
    prog = CopositiveProgram(tuple([A0] + mats), c)
    return (prog, K, pair, M @ M.T) if with_psd else (prog, K, pair)


def certified_points(rng, prog, psd, count):
    """Points ``x`` with ``A(x) - psd`` entrywise nonnegative.

    ``A(x)`` is then PSD plus nonnegative, hence copositive, so every
    returned point is feasible without relying on a grid.
    """
    R = prog.A[0] - psd
    out = []
    while len(out) < count:
        d = rng.standard_normal(prog.n)
        B = np.tensordot(d, prog.stacked[1:], axes=1)
        neg = B < -1e-15
        s_max = np.min(R[neg] / -B[neg]) if neg.any() else 1.0
        x = d * s_max * rng.random() * 0.999
        A = prog.A[0] + np.tensordot(x, prog.stacked[1:], axes=1)
        if np.all(A - psd >= 0):
            out.append(x)
    return out
