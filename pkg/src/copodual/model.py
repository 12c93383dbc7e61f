"""Problem data for linear copositive programs and linear SDPs.

A program is ``min c^T x  s.t.  A(x) = A_0 + sum_j x_j A_j`` in the cone
(copositive or PSD).  Programs are stored as JSON::

    {"kind": "copositive", "p": 2, "n": 1, "c": [1.0],
     "A": [[[0, 0], [0, 0]], [[1, 0], [0, 0]]]}

where ``A[0]`` is the constant term.
"""

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .cones import min_quad_over_simplex
from .config import DEFAULTS
from .symcore import SimplexGrid, simplex_grid
from .validation import DimensionError, check_symmetric, check_vector

KINDS = ("copositive", "sdp")


@dataclass(frozen=True, eq=False)
class CopositiveProgram:
    A: tuple
    c: np.ndarray
    kind = "copositive"

    def __post_init__(self):
        mats = [check_symmetric(M, f"A[{j}]") for j, M in enumerate(self.A)]
        if not mats:
            raise DimensionError("A must hold at least the constant term A_0")
        p = mats[0].shape[0]
        for j, M in enumerate(mats):
            if M.shape != (p, p):
                raise DimensionError(f"A[{j}] has shape {M.shape}, expected {(p, p)}")
            M.setflags(write=False)
        c = check_vector(self.c, len(mats) - 1, "c")
        c.setflags(write=False)
        object.__setattr__(self, "A", tuple(mats))
        object.__setattr__(self, "c", c)

    @property
    def p(self):
        return self.A[0].shape[0]

    @property
    def n(self):
        return len(self.A) - 1

    @property
    def stacked(self):
        """``(n + 1, p, p)`` array of the data matrices."""
        return np.stack(self.A)

    def to_dict(self):
        return {"kind": self.kind, "p": self.p, "n": self.n, "c": self.c.tolist(),
                "A": [M.tolist() for M in self.A]}

    def with_objective(self, c):
        return type(self)(self.A, c)


@dataclass(frozen=True, eq=False)
class SdpProgram(CopositiveProgram):
    kind = "sdp"


@dataclass
class FeasibilityReport:
    feasible: bool
    min_value: float
    witness: np.ndarray


def constraint_matrix(prog, x):
    """``A(x) = A_0 + sum_j x_j A_j``."""
    x = check_vector(x, prog.n, "x")
    return prog.A[0] + np.tensordot(x, prog.stacked[1:], axes=1) if prog.n else prog.A[0].copy()


def feasibility_check(prog, x, grid=None, tol=DEFAULTS["cop_tol"],
                      refine_rounds=DEFAULTS["refine_rounds"]):
    if grid is None:
        grid = simplex_grid(prog.p, DEFAULTS["grid"])
    if not isinstance(grid, SimplexGrid):
        raise TypeError("grid must be a SimplexGrid")
    val, pt = min_quad_over_simplex(constraint_matrix(prog, x), grid, refine_rounds)
    return FeasibilityReport(feasible=val >= -tol, min_value=val, witness=pt)


def program_from_dict(data):
    try:
        kind = data.get("kind", "copositive")
        p, n = int(data["p"]), int(data["n"])
        c, A = data["c"], data["A"]
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ValueError(f"malformed program document: {exc}") from exc
    if kind not in KINDS:
        raise ValueError(f"unknown program kind {kind!r}")
    if len(A) != n + 1:
        raise DimensionError(f"expected {n + 1} matrices in A, got {len(A)}")
    if len(c) != n:
        raise DimensionError(f"expected c of length {n}, got {len(c)}")
    mats = []
    for j, M in enumerate(A):
        M = np.asarray(M, dtype=float)
        if M.shape != (p, p):
            raise DimensionError(f"A[{j}] has shape {M.shape}, expected {(p, p)}")
        mats.append(M)
    cls = SdpProgram if kind == "sdp" else CopositiveProgram
    return cls(tuple(mats), c)


def load_program(path):
    path = Path(path)
    with path.open() as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not valid JSON ({exc})") from exc
    return program_from_dict(data)


def save_program(prog, path):
    if not str(path):
        raise OSError("empty output path")
    path = Path(path)
    # json writes floats with repr, which round-trips doubles exactly
    path.write_text(json.dumps(prog.to_dict(), indent=1) + "\n")


def load_fixture(name):
    """Load one of the bundled fixture programs, e.g. ``"ex_ns"``."""
    with resources.files("copodual").joinpath("data", f"{name}.json").open() as fh:
        return program_from_dict(json.load(fh))


def load_matrix(path):
    """Read a single symmetric matrix: a bare 2-d array or ``{"matrix": ...}``."""
    with Path(path).open() as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not valid JSON ({exc})") from exc
    if isinstance(data, dict):
        if "matrix" not in data:
            raise ValueError(f"{path}: expected a 'matrix' field")
        data = data["matrix"]
    return check_symmetric(np.asarray(data, dtype=float), "matrix")
