"""Extended duals for linear copositive programs.

The main entry points are :func:`build_dual` (or the estimator
:class:`ExtendedDualBuilder`), :func:`is_copositive`, the verification
helpers in :mod:`copodual.verify` and the SDP conversion in
:mod:`copodual.sdpbridge`.
"""

from .cones import CopositivityVerdict, CpFactor, cp_block, cp_gram, is_copositive, is_psd, \
    min_quad_over_simplex
from .config import GenConfig
from .dam import DataSet, compute_theta, dam_step, run_dam, separation_holds, support
from .dualgen import ExtendedDualBuilder, ExtendedDualSolution, build_dual, find_immobile, \
    final_step, iterate, restriction_problem, verify_immobile
from .lp import LinearProgram, LpSolution, active_support, solve_lp
from .model import CopositiveProgram, SdpProgram, constraint_matrix, feasibility_check, \
    load_fixture, load_program, save_program
from .symcore import dist_to_hull, max_eigenvalue, quad_form, simplex_grid, trace_inner

__version__ = "0.1.0"

__all__ = [
    "CopositivityVerdict", "CpFactor", "cp_block", "cp_gram", "is_copositive", "is_psd",
    "min_quad_over_simplex", "GenConfig", "DataSet", "compute_theta", "dam_step", "run_dam",
    "separation_holds", "support", "ExtendedDualBuilder", "ExtendedDualSolution", "build_dual",
    "find_immobile", "final_step", "iterate", "restriction_problem", "verify_immobile",
    "LinearProgram", "LpSolution", "active_support", "solve_lp", "CopositiveProgram",
    "SdpProgram", "constraint_matrix", "feasibility_check", "load_fixture", "load_program",
    "save_program", "dist_to_hull", "max_eigenvalue", "quad_form", "simplex_grid", "trace_inner",
]
