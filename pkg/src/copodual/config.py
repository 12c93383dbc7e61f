"""Default tolerances and schedule parameters, in one place."""

from dataclasses import asdict, dataclass

# Thresholds shared across modules so P_+ and symmetry checks agree everywhere.
SUPPORT_THRESHOLD = 1e-12
SYMMETRY_WARN = 1e-9
SYMMETRY_FAIL = 1e-6

DEFAULTS = {
    "grid": 16,
    "refine_rounds": 3,
    "refine_points": 5,
    "cop_tol": 1e-7,
    "mu_threshold": 1e-7,
    "mu_bound": 1e6,
    "eps_init": None,  # None -> 4 * grid cell diameter
    "eps_shrink": 0.5,
    "max_retries": 6,
    "box_radius": 1e3,
    "max_iters": None,  # None -> 2**p - 1
    "gap_tol": 1e-6,
    "multiplier_tol": 1e-9,
    "pivot_tol": 1e-10,
    "lp_rule": "bland",
    "grid_cap": 2_000_000,
    "n_jobs": 1,
    "exchange_rounds": 20,
}


@dataclass
class GenConfig:
    grid: int = DEFAULTS["grid"]
    refine_rounds: int = DEFAULTS["refine_rounds"]
    mu_threshold: float = DEFAULTS["mu_threshold"]
    mu_bound: float = DEFAULTS["mu_bound"]
    eps_init: float | None = DEFAULTS["eps_init"]
    eps_shrink: float = DEFAULTS["eps_shrink"]
    max_retries: int = DEFAULTS["max_retries"]
    box_radius: float = DEFAULTS["box_radius"]
    max_iters: int | None = DEFAULTS["max_iters"]
    gap_tol: float = DEFAULTS["gap_tol"]
    multiplier_tol: float = DEFAULTS["multiplier_tol"]
    cop_tol: float = DEFAULTS["cop_tol"]
    lp_rule: str = DEFAULTS["lp_rule"]
    n_jobs: int = DEFAULTS["n_jobs"]
    exchange_rounds: int = DEFAULTS["exchange_rounds"]

    def __post_init__(self):
        if self.grid < 1:
            raise ValueError("grid resolution must be >= 1")
        if self.max_retries < 0 or self.exchange_rounds < 0:
            raise ValueError("max_retries and exchange_rounds must be nonnegative")
        for name in ("mu_threshold", "mu_bound", "box_radius", "gap_tol",
                     "multiplier_tol", "cop_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.refine_rounds < 0:
            raise ValueError("refine_rounds must be nonnegative")
        if not 0 < self.eps_shrink < 1:
            raise ValueError("eps_shrink must lie in (0, 1)")
        if self.eps_init is not None and self.eps_init <= 0:
            raise ValueError("eps_init must be positive")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.lp_rule not in ("bland", "dantzig"):
            raise ValueError("lp_rule must be 'bland' or 'dantzig'")

    def as_dict(self):
        return asdict(self)


def seed_from_env(default=0):
    """Integer seed from ``COPODUAL_SEED``, or ``default`` when unset."""
    import os
    raw = os.environ.get("COPODUAL_SEED")
    return default if raw in (None, "") else int(raw)
