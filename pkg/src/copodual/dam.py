"""Data modification on multiplier data sets.

A data set holds new points ``tau(s)`` with weights ``gamma(s)`` (the delta
part) and already-accepted points ``tau(i)`` with weights ``gamma(i)`` and
nonnegative vectors ``lambda(i)`` (the base part).  The procedure reshapes
the delta points until no base support is contained in a delta support,
while keeping

    sum gamma(i) tau(i)^T A tau(i) + sum_base lambda(i)^T A tau(i)

unchanged for every symmetric ``A``.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .config import SUPPORT_THRESHOLD
from .symcore import dist_to_hull
from .validation import CopodualError, DimensionError, check_simplex_point

log = logging.getLogger(__name__)

HULL_FLAG_TOL = 1e-9


class DamStepLimit(CopodualError, RuntimeError):
    pass


class ThetaError(CopodualError, ValueError):
    pass


def _as_rows(a, p, name):
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return np.zeros((0, p))
    a = np.atleast_2d(a)
    if a.shape[1] != p:
        raise DimensionError(f"{name} rows must have length {p}, got {a.shape[1]}")
    return a


@dataclass(frozen=True, eq=False)
class DataSet:
    delta_taus: np.ndarray
    delta_gammas: np.ndarray
    base_taus: np.ndarray
    base_lambdas: np.ndarray
    base_gammas: np.ndarray

    def __post_init__(self):
        dt = np.asarray(self.delta_taus, dtype=float)
        bt = np.asarray(self.base_taus, dtype=float)
        widths = [a.shape[-1] for a in (dt, bt) if a.size]
        if not widths:
            widths = [a.shape[-1] for a in (dt, bt) if a.ndim == 2]
        if not widths or widths[0] < 1:
            raise DimensionError("cannot infer the dimension of an empty data set")
        p = widths[0]
        dt = _as_rows(dt, p, "delta_taus")
        bt = _as_rows(bt, p, "base_taus")
        bl = _as_rows(self.base_lambdas, p, "base_lambdas")
        dg = np.asarray(self.delta_gammas, dtype=float).reshape(-1)
        bg = np.asarray(self.base_gammas, dtype=float).reshape(-1)
        if dg.shape[0] != dt.shape[0]:
            raise DimensionError("one gamma per delta point required")
        if bg.shape[0] != bt.shape[0] or bl.shape[0] != bt.shape[0]:
            raise DimensionError("one gamma and one lambda per base point required")
        for t in np.vstack([dt, bt]):
            check_simplex_point(t, p, tol=1e-9)
        if np.any(dg <= 0) or np.any(bg <= 0):
            raise ValueError("all gammas must be positive")
        if np.any(bl < 0):
            raise ValueError("all lambdas must be nonnegative")
        for name, arr in (("delta_taus", dt), ("delta_gammas", dg), ("base_taus", bt),
                          ("base_lambdas", bl), ("base_gammas", bg)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def p(self):
        return self.delta_taus.shape[1]

    def bilinear(self, A):
        """``sum gamma tau^T A tau + sum_base lambda^T A tau``."""
        A = np.asarray(A, dtype=float)
        val = np.einsum("i,ij,jk,ik->", self.delta_gammas, self.delta_taus, A, self.delta_taus)
        val += np.einsum("i,ij,jk,ik->", self.base_gammas, self.base_taus, A, self.base_taus)
        val += np.einsum("ij,jk,ik->", self.base_lambdas, A, self.base_taus)
        return float(val)


def support(tau, threshold=SUPPORT_THRESHOLD):
    """Indices (0-based) of the coordinates of ``tau`` above ``threshold``."""
    return frozenset(int(k) for k in np.flatnonzero(np.asarray(tau) > threshold))


def separation_holds(data):
    """True if every base support sticks out of every delta support.

    Otherwise returns the first violating pair ``(s, i)`` (delta index, base
    index), scanning delta points in order and base points within each.
    """
    base_supp = [support(t) for t in data.base_taus]
    for s, ts in enumerate(data.delta_taus):
        ps = support(ts)
        for i, pi in enumerate(base_supp):
            if pi <= ps:
                return (s, i)
    return True


def compute_theta(tau_s, tau_i):
    tau_s = np.asarray(tau_s, dtype=float)
    tau_i = np.asarray(tau_i, dtype=float)
    pi = support(tau_i)
    if not pi <= support(tau_s):
        raise ValueError("support of tau_i must be contained in support of tau_s")
    ks = sorted(pi)
    theta = float(np.min(tau_s[ks] / tau_i[ks]))
    if not 0.0 < theta < 1.0 - 1e-12:
        raise ThetaError(f"theta = {theta!r} outside (0, 1); the delta point lies in the base hull")
    return theta


def dam_step(data, s0, i0):
    """One replacement of the data at the violating pair ``(s0, i0)``."""
    return _replace(data, s0, i0)[0]


def _replace(data, s0, i0):
    ts, ti = data.delta_taus[s0], data.base_taus[i0]
    theta = compute_theta(ts, ti)
    ks = sorted(support(ti))
    new_tau = (ts - theta * ti) / (1.0 - theta)
    # the minimising coordinate is zero in exact arithmetic
    new_tau[ks[int(np.argmin(ts[ks] / ti[ks]))]] = 0.0
    new_tau = np.clip(new_tau, 0.0, None)
    new_tau /= new_tau.sum()
    gs = data.delta_gammas[s0]

    dt = data.delta_taus.copy()
    dg = data.delta_gammas.copy()
    bl = data.base_lambdas.copy()
    bg = data.base_gammas.copy()
    dt[s0] = new_tau
    bl[i0] = bl[i0] + 2.0 * gs * theta * (1.0 - theta) * new_tau
    bg[i0] = bg[i0] + gs * theta ** 2
    dg[s0] = gs * (1.0 - theta) ** 2
    return DataSet(dt, dg, data.base_taus, bl, bg), theta


@dataclass
class DamInfo:
    steps: int = 0
    thetas: list = field(default_factory=list)
    hull_flags: list = field(default_factory=list)


def run_dam(data, max_steps=None, return_info=False):
    """Apply :func:`dam_step` until the separation condition holds."""
    if max_steps is None:
        max_steps = max(1, data.delta_taus.shape[0] * data.base_taus.shape[0] * 2 ** data.p)
    info = DamInfo()
    while True:
        pair = separation_holds(data)
        if pair is True:
            break
        if info.steps >= max_steps:
            raise DamStepLimit(f"data modification did not finish within {max_steps} steps")
        s0, i0 = pair
        data, theta = _replace(data, s0, i0)
        info.steps += 1
        info.thetas.append(theta)
        d = dist_to_hull(data.delta_taus[s0], data.base_taus)
        if d <= HULL_FLAG_TOL:
            log.warning("modified point %d is within %.2g of the base hull", s0, d)
            info.hull_flags.append(s0)
    return (data, info) if return_info else data
