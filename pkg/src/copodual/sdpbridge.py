"""Extended duals of linear SDPs and the conversion between their two forms.

``EdSolution`` carries PSD blocks ``[[U_m, W_m], [W_m^T, D_m]]``;
``EdrSolution`` carries blocks ``[[U~_m, W~_m], [W~_m^T, I]]``.  The
conversion rescales the levels by factors ``rho(m)`` computed from the top
level down, which keeps every equality and the objective while turning each
block condition into a Schur-complement one.
"""

from dataclasses import dataclass

import numpy as np

from .cones import is_psd
from .model import SdpProgram
from .symcore import max_eigenvalue, min_eigenvalue
from .validation import CopodualError, DimensionError, check_square

EQ_TOL = 1e-7
PSD_TOL = 1e-8


class EdInfeasibleError(CopodualError, ValueError):
    pass


def _mat(M, p, name):
    M = check_square(M, name)
    if M.shape[0] != p:
        raise DimensionError(f"{name} must be {p} x {p}, got {M.shape}")
    return M


def _inner(S, prog):
    return np.einsum("ik,jik->j", S, prog.stacked)


@dataclass(eq=False)
class EdSolution:
    """Levels ``m = 1..m0`` of ``(U_m, W_m, D_m)`` plus the top matrix ``U``.

    ``factors`` optionally holds ``(V_m, L_m)`` pairs with ``U_m = V V^T``,
    ``W_m = V L^T`` and ``D_m = L L^T`` (signs unrestricted).
    """

    U_levels: list
    W_levels: list
    D_levels: list
    U: np.ndarray
    factors: list = None

    def __post_init__(self):
        self.U = check_square(self.U, "U")
        p = self.U.shape[0]
        if not len(self.U_levels) == len(self.W_levels) == len(self.D_levels):
            raise DimensionError("U, W and D need one matrix per level each")
        self.U_levels = [_mat(M, p, f"U_{m}") for m, M in enumerate(self.U_levels, 1)]
        self.W_levels = [_mat(M, p, f"W_{m}") for m, M in enumerate(self.W_levels, 1)]
        self.D_levels = [_mat(M, p, f"D_{m}") for m, M in enumerate(self.D_levels, 1)]

    @property
    def p(self):
        return self.U.shape[0]

    @property
    def m0(self):
        return len(self.U_levels)

    def W(self, m):
        return np.zeros((self.p, self.p)) if m == 0 else self.W_levels[m - 1]

    @classmethod
    def from_factors(cls, levels, final_V):
        levels = [(np.asarray(V, dtype=float), np.asarray(L, dtype=float)) for V, L in levels]
        final_V = np.asarray(final_V, dtype=float)
        return cls([V @ V.T for V, _ in levels], [V @ L.T for V, L in levels],
                   [L @ L.T for _, L in levels], final_V @ final_V.T, factors=levels)

    def to_dict(self):
        return {"m0": self.m0, "U": self.U.tolist(),
                "levels": [{"U": U.tolist(), "W": W.tolist(), "D": D.tolist()}
                           for U, W, D in zip(self.U_levels, self.W_levels, self.D_levels)]}

    @classmethod
    def from_dict(cls, data):
        lv = data["levels"]
        if "m0" in data and int(data["m0"]) != len(lv):
            raise DimensionError("m0 does not match the number of levels")
        return cls([np.asarray(x["U"], dtype=float) for x in lv],
                   [np.asarray(x["W"], dtype=float) for x in lv],
                   [np.asarray(x["D"], dtype=float) for x in lv],
                   np.asarray(data["U"], dtype=float))


@dataclass(eq=False)
class EdrSolution:
    """Levels ``m = 1..m0`` of ``(U~_m, W~_m)``, the top ``U~`` and the scale factors."""

    U_levels: list
    W_levels: list
    U: np.ndarray
    rhos: list = None

    def __post_init__(self):
        self.U = check_square(self.U, "U")
        p = self.U.shape[0]
        if len(self.U_levels) != len(self.W_levels):
            raise DimensionError("U and W need one matrix per level each")
        self.U_levels = [_mat(M, p, f"U_{m}") for m, M in enumerate(self.U_levels, 1)]
        self.W_levels = [_mat(M, p, f"W_{m}") for m, M in enumerate(self.W_levels, 1)]

    @property
    def p(self):
        return self.U.shape[0]

    @property
    def m0(self):
        return len(self.U_levels)

    def W(self, m):
        return np.zeros((self.p, self.p)) if m == 0 else self.W_levels[m - 1]

    def to_dict(self):
        return {"m0": self.m0, "U": self.U.tolist(),
                "rho": None if self.rhos is None else [float(r) for r in self.rhos],
                "levels": [{"U": U.tolist(), "W": W.tolist()}
                           for U, W in zip(self.U_levels, self.W_levels)]}

    @classmethod
    def from_dict(cls, data):
        lv = data["levels"]
        return cls([np.asarray(x["U"], dtype=float) for x in lv],
                   [np.asarray(x["W"], dtype=float) for x in lv],
                   np.asarray(data["U"], dtype=float), data.get("rho"))


def dual_objective(prog, sol):
    """``-(U + W_m0) . A0`` for either solution form."""
    return -float(np.sum((sol.U + sol.W(sol.m0)) * prog.A[0]))


def _equalities(prog, sol):
    levels = [_inner(sol.U_levels[m - 1] + sol.W(m - 1), prog) for m in range(1, sol.m0 + 1)]
    top = _inner(sol.U + sol.W(sol.m0), prog)[1:] - prog.c
    res = np.concatenate([np.abs(np.concatenate(levels)) if levels else np.zeros(0), np.abs(top)])
    return levels, top, float(res.max(initial=0.0))


def _psd_residual(M):
    """``max(0, -lambda_min(M))``."""
    return max(0.0, -min_eigenvalue((M + M.T) / 2.0))


def ed_feasible(prog, ed, tol=EQ_TOL, psd_tol=PSD_TOL):
    """Equality residuals and PSD residuals of the full ``2p x 2p`` blocks."""
    if ed.p != prog.p:
        raise DimensionError("solution and program dimensions differ")
    _, _, eq = _equalities(prog, ed)
    blocks = [_psd_residual(np.block([[U, W], [W.T, D]]))
              for U, W, D in zip(ed.U_levels, ed.W_levels, ed.D_levels)]
    top = _psd_residual(ed.U)
    psd = max(blocks + [top])
    return {"max_equality_residual": eq, "block_psd_residuals": blocks,
            "U_psd_residual": top, "max_psd_residual": psd,
            "equalities_ok": eq <= tol, "psd_ok": psd <= psd_tol,
            "feasible": bool(eq <= tol and psd <= psd_tol)}


def edr_feasible(prog, edr, tol=EQ_TOL, psd_tol=PSD_TOL):
    """Equality residuals plus Schur-complement checks ``U~_m - W~_m W~_m^T >= 0``."""
    if edr.p != prog.p:
        raise DimensionError("solution and program dimensions differ")
    _, _, eq = _equalities(prog, edr)
    schur = [_psd_residual(U - W @ W.T) for U, W in zip(edr.U_levels, edr.W_levels)]
    top = _psd_residual(edr.U)
    psd = max(schur + [top])
    return {"max_equality_residual": eq, "schur_psd_residuals": schur,
            "U_psd_residual": top, "max_psd_residual": psd,
            "equalities_ok": eq <= tol, "psd_ok": psd <= psd_tol,
            "feasible": bool(eq <= tol and psd <= psd_tol)}


def rho_factors(ed):
    """``rho(m)`` for ``m = 1..m0`` (index ``m - 1``), computed from the top down.

    ``mu_max(L_m^T L_m)`` equals ``mu_max(D_m)``, which is what is used here
    so that factor-free solutions convert too.
    """
    m0 = ed.m0
    rho = [1.0] * m0
    if m0 == 0:
        return rho
    rho[m0 - 1] = max(1.0, max_eigenvalue(ed.D_levels[m0 - 1]))
    for m in range(m0, 1, -1):
        rho[m - 2] = max(1.0, rho[m - 1] ** 2 * max_eigenvalue(ed.D_levels[m - 2]))
    return rho


def ed_to_edr(ed, prog=None, strict=True, tol=EQ_TOL, psd_tol=PSD_TOL):
    """Rescale an extended-dual solution into the Schur-complement form.

    With ``strict`` the input must pass :func:`ed_feasible` (equalities are
    only checked when ``prog`` is given).
    """
    if strict:
        if prog is not None:
            rep = ed_feasible(prog, ed, tol, psd_tol)
            if not rep["feasible"]:
                raise EdInfeasibleError(f"input is not feasible: {rep}")
        else:
            bad = [m for m, (U, W, D) in enumerate(zip(ed.U_levels, ed.W_levels, ed.D_levels), 1)
                   if _psd_residual(np.block([[U, W], [W.T, D]])) > psd_tol]
            if bad or _psd_residual(ed.U) > psd_tol:
                raise EdInfeasibleError(f"blocks {bad} (or U) are not PSD")
    rho = rho_factors(ed)
    U_t = [rho[m - 1] * ed.U_levels[m - 1] for m in range(1, ed.m0 + 1)]
    # W~_{m-1} = rho(m) W_{m-1}; W~_{m0} = W_{m0}
    W_t = [rho[m] * ed.W_levels[m - 1] for m in range(1, ed.m0)]
    if ed.m0:
        W_t.append(ed.W_levels[-1].copy())
    return EdrSolution(U_t, W_t, ed.U.copy(), rhos=rho)


def edr_to_ed(edr):
    """Embed a Schur-form solution back with ``D_m = I``."""
    eye = np.eye(edr.p)
    return EdSolution([U.copy() for U in edr.U_levels], [W.copy() for W in edr.W_levels],
                      [eye.copy() for _ in range(edr.m0)], edr.U.copy())


def psd_bound_check(Q, sample_count=1000, rng=None):
    """Check ``t^T Q t <= mu_max(Q) t^T t`` on random directions."""
    Q = check_square(Q, "Q")
    rng = np.random.default_rng(rng)
    lam = max_eigenvalue(Q)
    T = rng.standard_normal((sample_count, Q.shape[0]))
    lhs = np.einsum("ti,ij,tj->t", T, Q, T)
    rhs = lam * np.einsum("ti,ti->t", T, T)
    return bool(np.all(lhs <= rhs + 1e-9 * (1.0 + np.abs(rhs))))


def random_feasible_ed(rng, p, n, m0, width=None, scale=1.0):
    """A random SDP program together with a feasible extended-dual solution.

    Factors are drawn first; each data matrix is then projected onto the
    orthogonal complement of the level matrices ``U_m + W_{m-1}`` and ``c``
    is read off the top level, so every equality holds by construction.
    """
    rng = np.random.default_rng(rng)
    width = width or p
    levels = [(rng.standard_normal((p, width)) * scale / np.sqrt(width),
               rng.standard_normal((p, width)) * scale / np.sqrt(width)) for _ in range(m0)]
    final_V = rng.standard_normal((p, width)) / np.sqrt(width)
    ed = EdSolution.from_factors(levels, final_V)
    S = [ed.U_levels[m - 1] + ed.W(m - 1) for m in range(1, m0 + 1)]
    S = [(M + M.T) / 2.0 for M in S]
    basis = np.array([M.reshape(-1) for M in S]).T if S else np.zeros((p * p, 0))
    q = np.linalg.qr(basis)[0] if S else basis
    mats = []
    for _ in range(n + 1):
        B = rng.standard_normal((p, p))
        a = ((B + B.T) / 2.0).reshape(-1)
        a = a - q @ (q.T @ a)
        A = a.reshape(p, p)
        mats.append((A + A.T) / 2.0)
    top = ed.U + ed.W(m0)
    c = np.array([float(np.sum(top * A)) for A in mats[1:]])
    return SdpProgram(tuple(mats), c), ed


def is_block_psd(U, W, D, tol=PSD_TOL):
    return is_psd(np.block([[U, W], [W.T, D]]), tol)
