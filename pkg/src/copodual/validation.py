"""Input checking shared by every public entry point."""

import warnings

import numpy as np

from .config import SYMMETRY_FAIL, SYMMETRY_WARN


class CopodualError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(CopodualError, ValueError):
    pass


class AsymmetryError(CopodualError, ValueError):
    pass


class AsymmetryWarning(UserWarning):
    pass


def check_square(M, name="matrix"):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise DimensionError(f"{name} must be a nonempty square 2-d array, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def check_symmetric(M, name="matrix", warn_tol=SYMMETRY_WARN, fail_tol=SYMMETRY_FAIL):
    """Return ``(M + M.T) / 2`` after checking how far ``M`` is from symmetric.

    Asymmetry above ``fail_tol`` raises; above ``warn_tol`` it is averaged
    away with an :class:`AsymmetryWarning`.
    """
    M = check_square(M, name)
    asym = float(np.max(np.abs(M - M.T)))
    if asym > fail_tol:
        raise AsymmetryError(f"{name} is not symmetric (max |M - M^T| = {asym:.3g})")
    if asym > warn_tol:
        warnings.warn(f"{name} symmetrized (max |M - M^T| = {asym:.3g})", AsymmetryWarning,
                      stacklevel=2)
    return (M + M.T) / 2.0


def check_vector(x, size=None, name="vector"):
    x = np.asarray(x, dtype=float).reshape(-1)
    if size is not None and x.shape[0] != size:
        raise DimensionError(f"{name} must have length {size}, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} has non-finite entries")
    return x


def check_simplex_point(t, p=None, tol=1e-12, name="simplex point"):
    """Validate a point of the standard simplex ``{t >= 0, sum(t) = 1}``."""
    t = check_vector(t, p, name)
    if t.shape[0] < 1:
        raise DimensionError(f"{name} must be nonempty")
    if np.any(t < -tol):
        raise ValueError(f"{name} has negative entries: {t}")
    if abs(t.sum() - 1.0) > tol:
        raise ValueError(f"{name} must sum to 1, sums to {t.sum()!r}")
    return np.clip(t, 0.0, None)


def check_nonnegative(B, name="factor"):
    B = np.asarray(B, dtype=float)
    if B.ndim != 2:
        raise DimensionError(f"{name} must be 2-d, got shape {B.shape}")
    if np.any(B < 0):
        raise ValueError(f"{name} has negative entries (min {B.min():.3g})")
    return B
