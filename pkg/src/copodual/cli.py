"""Command-line front end.

Every subcommand builds a JSON-ready payload; ``--json`` prints it, the
default prints a short human rendering of the same payload, and ``--out``
writes it to a file.

Exit codes: 0 success / copositive, 1 not copositive or conversion check
failed, 2 inconclusive, 64 bad input, 65 infeasible, 66 duality gap or
construction failure, 67 unbounded.
"""

import argparse
import json
import logging
import sys

import numpy as np

from .cones import COPOSITIVE, NOT_COPOSITIVE, is_copositive
from .config import DEFAULTS, GenConfig
from .dualgen import (STATUS_GAP, STATUS_INFEASIBLE, STATUS_OPTIMAL, STATUS_UNBOUNDED,
                      ExtendedDualSolution, build_dual, find_immobile)
from .model import load_matrix, load_program
from .sdpbridge import EdSolution, dual_objective, ed_feasible, ed_to_edr, edr_feasible
from .validation import CopodualError
from .verify import INFEASIBLE_DUAL, STRONG, dual_feasible, slater_probe, strong_duality_report

EXIT_OK = 0
EXIT_NOT_COPOSITIVE = 1
EXIT_INCONCLUSIVE = 2
EXIT_BAD_INPUT = 64
EXIT_INFEASIBLE = 65
EXIT_GAP = 66
EXIT_UNBOUNDED = 67

STATUS_EXIT = {STATUS_OPTIMAL: EXIT_OK, STATUS_INFEASIBLE: EXIT_INFEASIBLE,
               STATUS_UNBOUNDED: EXIT_UNBOUNDED, STATUS_GAP: EXIT_GAP}


class BadInput(Exception):
    pass


def _fmt(v):
    return np.array2string(np.asarray(v, dtype=float), precision=6, suppress_small=True)


def _config(args, **extra):
    kw = {"grid": args.grid}
    if args.eps_init is not None:
        kw["eps_init"] = args.eps_init
    if args.max_iters is not None:
        kw["max_iters"] = args.max_iters
    kw.update(extra)
    return GenConfig(**kw)


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise BadInput(f"{path}: not valid JSON ({exc})") from exc


def _load_program(path, kind=None):
    prog = load_program(path)
    if kind is not None and prog.kind != kind:
        raise BadInput(f"{path}: expected a program of kind {kind!r}, got {prog.kind!r}")
    return prog


# ------------------------------------------------------------------ commands

def cmd_check_cop(args):
    D = load_matrix(args.input)
    tol = args.tol if args.tol is not None else DEFAULTS["cop_tol"]
    v = is_copositive(D, tol=tol, grid_resolution=args.grid, n_jobs=args.threads)
    payload = v.to_dict()
    code = {COPOSITIVE: EXIT_OK, NOT_COPOSITIVE: EXIT_NOT_COPOSITIVE}.get(v.status,
                                                                        EXIT_INCONCLUSIVE)
    lines = [f"verdict: {v.status}", f"min value: {v.min_value:.10g}",
             f"witness: {_fmt(v.witness)}"]
    return payload, lines, code


def cmd_find_immobile(args):
    prog = _load_program(args.input, "copositive")
    extra = {"mu_threshold": args.tol} if args.tol is not None else {}
    cfg = _config(args, **extra)
    status, levels, slater, trace = find_immobile(prog, cfg)
    probe = slater_probe(prog, tol=cfg.mu_threshold) if status != STATUS_INFEASIBLE else False
    payload = {"status": status, "levels": [lv.tolist() for lv in levels],
               "slater_probe": probe, "trace": trace}
    if status == STATUS_INFEASIBLE:
        return payload, ["program is infeasible"], EXIT_INFEASIBLE
    lines = []
    for s, lv in enumerate(levels):
        for t in lv:
            lines.append(f"level {s}: tau = {_fmt(t)}")
    if not levels:
        lines.append("no immobile indices")
    lines.append(f"slater: {str(probe).lower()}")
    return payload, lines, EXIT_OK


def cmd_build_dual(args):
    prog = _load_program(args.input, "copositive")
    extra = {"gap_tol": args.tol} if args.tol is not None else {}
    cfg = _config(args, n_jobs=args.threads, **extra)
    result = build_dual(prog, cfg)
    payload = result.to_dict()
    code = STATUS_EXIT[result.status]
    lines = [f"status: {result.status}"]
    if result.solution is not None:
        rep = strong_duality_report(prog, result.x, result.solution, tol=cfg.gap_tol)
        payload["report"] = rep.to_dict()
        if code == EXIT_OK and rep.verdict != STRONG:
            code = EXIT_GAP
        lines += [f"m0: {result.m0}", f"x0: {_fmt(result.x)}",
                  f"primal value: {rep.primal_value:.10g}",
                  f"dual value: {rep.dual_value:.10g}", f"gap: {rep.gap:.3g}",
                  f"max residual: {rep.max_residual:.3g}", f"verdict: {rep.verdict}"]
    elif result.m0 is not None:
        lines.append(f"levels before stopping: {result.m0}")
    return payload, lines, code


def _read_solution(doc):
    if "solution" in doc:
        return ExtendedDualSolution.from_dict(doc["solution"]), doc.get("x")
    return ExtendedDualSolution.from_dict(doc), doc.get("x")


def cmd_verify(args):
    prog = _load_program(args.input, "copositive")
    try:
        sol, x = _read_solution(_load_json(args.solution))
    except (KeyError, TypeError) as exc:
        raise BadInput(f"{args.solution}: malformed solution document ({exc})") from exc
    if args.x is not None:
        x = [float(v) for v in args.x.split(",")]
    if x is None:
        raise BadInput("no primal point: pass --x or a solution document with an 'x' field")
    tol = args.tol if args.tol is not None else DEFAULTS["gap_tol"]
    rep = strong_duality_report(prog, x, sol, tol=tol)
    res = dual_feasible(prog, sol, tol=tol)
    payload = {"report": rep.to_dict(), "residuals": res}
    code = {STRONG: EXIT_OK, INFEASIBLE_DUAL: EXIT_INFEASIBLE}.get(rep.verdict, EXIT_GAP)
    lines = [f"verdict: {rep.verdict}", f"primal value: {rep.primal_value:.10g}",
             f"dual value: {rep.dual_value:.10g}", f"gap: {rep.gap:.3g}",
             f"max residual: {rep.max_residual:.3g}"]
    return payload, lines, code


def cmd_sdp_convert(args):
    prog = _load_program(args.input, "sdp")
    try:
        ed = EdSolution.from_dict(_load_json(args.solution))
    except (KeyError, TypeError) as exc:
        raise BadInput(f"{args.solution}: malformed solution document ({exc})") from exc
    if ed.p != prog.p:
        raise BadInput("solution and program dimensions differ")
    tol = args.tol if args.tol is not None else 1e-7
    pre = ed_feasible(prog, ed, tol=tol)
    if not pre["equalities_ok"]:
        payload = {"input": pre}
        return payload, [f"input violates the equalities "
                         f"(residual {pre['max_equality_residual']:.3g})"], EXIT_INFEASIBLE
    edr = ed_to_edr(ed, prog, strict=pre["feasible"], tol=tol)
    post = edr_feasible(prog, edr, tol=tol)
    obj_ed, obj_edr = dual_objective(prog, ed), dual_objective(prog, edr)
    payload = {"input": pre, "output": post, "edr": edr.to_dict(),
               "objective_ed": obj_ed, "objective_edr": obj_edr}
    lines = [f"objective (input):     {obj_ed:.12g}",
             f"objective (converted): {obj_edr:.12g}",
             f"equality residual: {post['max_equality_residual']:.3g}",
             f"PSD residual: {post['max_psd_residual']:.3g}",
             f"feasible: {str(post['feasible']).lower()}"]
    return payload, lines, EXIT_OK if post["feasible"] else EXIT_NOT_COPOSITIVE


# ------------------------------------------------------------------ parser

def _common(p, solution=False):
    p.add_argument("input", help="input JSON file")
    if solution:
        p.add_argument("solution", help="solution JSON file")
    p.add_argument("--grid", type=int, default=DEFAULTS["grid"], help="simplex grid resolution")
    p.add_argument("--tol", type=float, default=None, help="main tolerance of the command")
    p.add_argument("--eps-init", type=float, default=None, help="initial restriction radius")
    p.add_argument("--max-iters", type=int, default=None, help="cap on the number of levels")
    p.add_argument("--json", action="store_true", help="print JSON instead of text")
    p.add_argument("--out", default=None, help="write the JSON payload to this file")
    p.add_argument("--threads", type=int, default=1, help="threads for grid evaluation")


def build_parser():
    parser = argparse.ArgumentParser(prog="copodual",
                                     description="Extended duals for copositive programs.")
    sub = parser.add_subparsers(dest="command", required=True)
    commands = [("check-cop", cmd_check_cop, False, "test a matrix for copositivity"),
                ("find-immobile", cmd_find_immobile, False, "list immobile indices by level"),
                ("build-dual", cmd_build_dual, False, "construct an extended dual solution"),
                ("verify", cmd_verify, True, "check a primal/dual pair"),
                ("sdp-convert", cmd_sdp_convert, True, "convert an SDP extended dual")]
    for name, func, sol, help_ in commands:
        p = sub.add_parser(name, help=help_)
        _common(p, solution=sol)
        if name == "verify":
            p.add_argument("--x", default=None, help="primal point, comma separated")
        p.set_defaults(func=func)
    return parser


def _check_args(args):
    if args.grid < 1:
        raise BadInput("--grid must be >= 1")
    if args.tol is not None and not args.tol > 0:
        raise BadInput("--tol must be positive")
    if args.eps_init is not None and not args.eps_init > 0:
        raise BadInput("--eps-init must be positive")
    if args.max_iters is not None and args.max_iters < 1:
        raise BadInput("--max-iters must be >= 1")
    if args.threads < 1:
        raise BadInput("--threads must be >= 1")


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_BAD_INPUT
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        _check_args(args)
        payload, lines, code = args.func(args)
    except (BadInput, OSError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except CopodualError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GAP
    except Exception as exc:  # keep tracebacks away from the shell
        logging.getLogger(__name__).debug("unexpected failure", exc_info=True)
        print(f"error: unexpected {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_GAP
    text = json.dumps(payload, sort_keys=True, indent=1)
    if args.out:
        try:
            with open(args.out, "w") as fh:
                fh.write(text + "\n")
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_BAD_INPUT
    print(text if args.json else "\n".join(lines))
    return code


if __name__ == "__main__":
    sys.exit(main())
