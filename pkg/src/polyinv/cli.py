"""Command-line front end: parse, sample, infer, check and analyze loops.

Every command prints one JSON report on stdout (or to ``--json PATH``) and a
short human summary on stderr.  Exit codes: 0 success, 1 FAIL, 2 budget
exhausted, 3 bad input.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path
from typing import List, Optional

from . import __version__
from .checker import BUDGET_EXCEEDED, certify, falsify_by_samples
from .groebner import Budget, BudgetExceeded
from .interpolate import BUDGET, EMPTY_NULLSPACE, infer_invariants
from .loop_model import InvariantMode, LoopError, LoopSystem, parse_loop, pretty_print
from .polyalg.poly import PolySyntaxError, parse_poly
from .recurrence_analysis import Unsupported, analyze, parse_lattice
from .sampler import SampleConfig, point_to_json, project, trajectory_states

EXIT_OK, EXIT_FAIL, EXIT_BUDGET, EXIT_INPUT = 0, 1, 2, 3
ANALYZE_DEGREE_CAP = 6


class InputError(Exception):
    pass


class Run:
    """Collects the report for one command."""

    def __init__(self, subcommand: str, args):
        self.subcommand = subcommand
        self.args = args
        self.digest = hashlib.sha256()
        self.config = {}
        self.budget = Budget.from_ms(args.budget_ms)

    def read(self, path: str) -> str:
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise InputError(f"{path}: {exc.strerror or exc}") from None
        self.digest.update(data)
        try:
            return data.decode("utf-8")
        except UnicodeDecodeError:
            raise InputError(f"{path}: not UTF-8 text") from None

    def load_loop(self, path: str) -> LoopSystem:
        text = self.read(path)
        try:
            return parse_loop(text)
        except LoopError as exc:
            raise InputError(f"{path}: {exc}") from None
        except PolySyntaxError as exc:
            raise InputError(f"{path}: {exc}") from None

    def report(self, status: str, result, reason: Optional[str], elapsed_ms: float) -> dict:
        return {
            "tool": "polyinv",
            "version": __version__,
            "subcommand": self.subcommand,
            "input_digest": "sha256:" + self.digest.hexdigest(),
            "config": self.config,
            "status": status,
            "failure_reason": reason,
            "result": result,
            "timing_ms": round(elapsed_ms, 3),
        }


def _mode(args) -> InvariantMode:
    return InvariantMode(args.mode)


def _sample_config(args) -> SampleConfig:
    try:
        return SampleConfig(
            mode=_mode(args),
            depth=args.depth,
            num_initials=args.initials,
            seed=args.seed,
            coordinate_bound=args.coordinate_bound,
            parametric=args.parametric,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _read_polys(run: Run, path: str, ring) -> list:
    out = []
    for lineno, line in enumerate(run.read(path).splitlines(), 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        try:
            out.append(parse_poly(text, ring))
        except PolySyntaxError as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from None
    return out


def _parse_blocks(text: str) -> List[List[str]]:
    """'x;y,z' -> [['x'], ['y', 'z']]"""
    blocks = [[v.strip() for v in part.split(",") if v.strip()] for part in text.split(";")]
    if not all(blocks):
        raise InputError(f"empty block in {text!r}")
    return blocks


# ------------------------------------------------------------------ commands

def cmd_parse(run: Run, args):
    loop = run.load_loop(args.loop)
    run.config = {"loop": args.loop}
    return "ok", {"loop": loop.to_dict(), "normalized": pretty_print(loop)}, None


def cmd_sample(run: Run, args):
    loop = run.load_loop(args.loop)
    cfg = _sample_config(args)
    run.config = {"loop": args.loop, "mode": cfg.mode.value, "depth": cfg.depth,
                  "initials": cfg.num_initials, "seed": cfg.seed,
                  "coordinate_bound": cfg.coordinate_bound, "parametric": cfg.parametric}
    states = trajectory_states(loop, cfg, args.max_points)
    ring = loop.ring if cfg.parametric else loop.variables
    points = [{"point": point_to_json(project(loop, s, cfg.parametric)), "depth": d} for s, d in states]
    return "ok", {"ring": list(ring), "count": len(points), "points": points}, None


def _analysis_or_none(loop, seed, budget):
    try:
        return analyze(loop, seed=seed, budget=budget)
    except (Unsupported, BudgetExceeded):
        return None


def cmd_infer(run: Run, args):
    loop = run.load_loop(args.loop)
    cfg = _sample_config(args)
    monomials = None
    ring = loop.ring if (cfg.parametric and loop.parameters) else tuple(loop.variables)
    if args.monomials:
        monomials = sorted({m for p in _read_polys(run, args.monomials, ring) for m in p.terms})
        if not monomials:
            raise InputError(f"{args.monomials}: no monomials")
    degree = args.degree
    notes = []
    analysis = None
    if args.analyze_first:
        rows = None
        if args.lattice:
            try:
                rows = parse_lattice(run.read(args.lattice))
            except ValueError as exc:
                raise InputError(f"{args.lattice}: {exc}") from None
        try:
            analysis = analyze(loop, rows, seed=args.seed, budget=run.budget)
        except Unsupported as exc:
            notes.append(f"analysis skipped: {exc}")
        if analysis is not None and degree is None:
            b = analysis.bounds
            bound = b["sharp_bound"] if b["hypothesis"] == "verified" else b["generic_bound"]
            if bound is not None:
                degree = min(bound, ANALYZE_DEGREE_CAP)
                notes.append(f"degree {degree} taken from the analysis bound {bound}")
    if degree is None:
        degree = 2
    if degree < 0:
        raise InputError("--degree must be >= 0")
    run.config = {"loop": args.loop, "degree": degree, "engine": args.engine, "mode": cfg.mode.value,
                  "max_images": args.max_images, "depth": cfg.depth, "initials": cfg.num_initials,
                  "seed": cfg.seed, "coordinate_bound": cfg.coordinate_bound,
                  "parametric": cfg.parametric, "margin": args.margin,
                  "monomials": args.monomials, "analyze_first": args.analyze_first,
                  "lattice": args.lattice}
    infer = infer_invariants(loop, degree, cfg, engine=args.engine, margin=args.margin,
                             max_images=args.max_images, monomials=monomials, budget=run.budget)
    res = infer.result
    payload = infer.to_dict()
    payload["notes"] = notes
    if analysis is None and res.reason == EMPTY_NULLSPACE and len(loop.branches) == 1:
        analysis = _analysis_or_none(loop, args.seed, Budget.from_ms(args.budget_ms))
    if analysis is not None:
        payload["analysis"] = {"verdict": analysis.verdict, "window": analysis.window,
                               "bounds": analysis.bounds}
        if res.reason == EMPTY_NULLSPACE:
            payload["cross_reference"] = f"analysis verdict: {analysis.verdict}"
    if res.ok:
        return "certified", payload, None
    if res.reason == BUDGET:
        return "budget-exceeded", payload, res.reason
    return "fail", payload, res.reason


def cmd_check(run: Run, args):
    loop = run.load_loop(args.loop)
    F = _read_polys(run, args.invariants, loop.ring)
    mode = _mode(args)
    run.config = {"loop": args.loop, "invariants": args.invariants, "mode": mode.value,
                  "falsify_depth": args.depth, "seed": args.seed}
    payload = {"invariants": [str(f) for f in F]}
    # cheap necessary condition first
    cex = falsify_by_samples(loop, F, SampleConfig(mode=mode, depth=args.depth, seed=args.seed))
    payload["counterexample"] = cex.to_dict() if cex else None
    if cex is not None:
        payload["certification"] = None
        return "fail", payload, f"falsified-branch({cex.branch})"
    report = certify(loop, F, mode, run.budget)
    payload["certification"] = report.to_dict()
    if report.status == BUDGET_EXCEEDED:
        return "budget-exceeded", payload, BUDGET
    if report.certified:
        return "certified", payload, None
    return "fail", payload, report.label()


def cmd_analyze(run: Run, args):
    loop = run.load_loop(args.loop)
    rows = None
    if args.lattice:
        try:
            rows = parse_lattice(run.read(args.lattice))
        except ValueError as exc:
            raise InputError(f"{args.lattice}: {exc}") from None
    coarsenings = [_parse_blocks(c) for c in args.coarsen]
    run.config = {"loop": args.loop, "lattice": args.lattice, "coarsen": args.coarsen,
                  "parametric": args.parametric, "seed": args.seed}
    try:
        report = analyze(loop, rows, coarsenings, args.parametric, args.seed, run.budget)
    except Unsupported as exc:
        return "fail", {"unsupported": exc.reason, "witness": exc.witness, "detail": exc.detail}, "unsupported"
    except ValueError as exc:
        raise InputError(str(exc)) from None
    return "ok", report.to_dict(), None


COMMANDS = {
    "parse": cmd_parse,
    "sample": cmd_sample,
    "infer": cmd_infer,
    "check": cmd_check,
    "analyze": cmd_analyze,
}

EXIT_FOR = {"ok": EXIT_OK, "certified": EXIT_OK, "fail": EXIT_FAIL,
            "budget-exceeded": EXIT_BUDGET, "input-error": EXIT_INPUT}


# ------------------------------------------------------------------ parser

def _global_flags(p: argparse.ArgumentParser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(0), help="random seed for sampling (default 0)")
    p.add_argument("--json", metavar="PATH", default=d(None), help="write the JSON report here instead of stdout")
    p.add_argument("--budget-ms", type=int, default=d(None), help="wall-clock budget in milliseconds")


def _sampling_flags(p, depth=12):
    p.add_argument("--mode", choices=[m.value for m in InvariantMode], default="inductive")
    p.add_argument("--depth", type=int, default=depth, help=f"iterations to emulate (default {depth})")
    p.add_argument("--initials", type=int, default=3, help="parameter instantiations (default 3)")
    p.add_argument("--coordinate-bound", type=int, default=20,
                   help="bound on numerators and denominators of random parameter values")
    p.add_argument("--parametric", action="store_true",
                   help="treat parameters as template variables")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polyinv", description="Polynomial loop invariants by interpolation.")
    ap.add_argument("--version", action="version", version=f"polyinv {__version__}")
    _global_flags(ap, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", parents=[common], help="parse a loop and echo it normalized")
    p.add_argument("loop")

    p = sub.add_parser("sample", parents=[common], help="emulate a loop and list trajectory points")
    p.add_argument("loop")
    _sampling_flags(p)
    p.add_argument("--max-points", type=int, default=None)

    p = sub.add_parser("infer", parents=[common], help="interpolate and certify invariants")
    p.add_argument("loop")
    p.add_argument("--degree", type=int, default=None, help="template degree (default 2)")
    p.add_argument("--engine", choices=["modular", "direct"], default="modular")
    p.add_argument("--max-images", type=int, default=8, help="modular images to try (default 8)")
    p.add_argument("--margin", type=int, default=5, help="extra points beyond the template size")
    p.add_argument("--monomials", metavar="FILE", help="template: monomials of these polynomials")
    p.add_argument("--analyze-first", action="store_true",
                   help="run the structural analysis and take the degree from its bound")
    p.add_argument("--lattice", metavar="FILE", help="relation lattice for --analyze-first")
    _sampling_flags(p)

    p = sub.add_parser("check", parents=[common], help="certify a list of polynomials")
    p.add_argument("loop")
    p.add_argument("invariants", help="one polynomial per line")
    p.add_argument("--mode", choices=[m.value for m in InvariantMode], default="inductive")
    p.add_argument("--depth", type=int, default=12, help="sampling depth of the falsifier")

    p = sub.add_parser("analyze", parents=[common], help="block structure, relation lattice and bounds")
    p.add_argument("loop")
    p.add_argument("--lattice", metavar="FILE", help="relation lattice basis, one integer row per line")
    p.add_argument("--coarsen", action="append", default=[], metavar="BLOCKS",
                   help="extra block partition such as 'x;y,z' (repeatable)")
    par = p.add_mutually_exclusive_group()
    par.add_argument("--parametric", dest="parametric", action="store_true", default=None,
                     help="initial values are symbolic (default: detected from init)")
    par.add_argument("--concrete", dest="parametric", action="store_false")
    return ap


def emit(report: dict, path: Optional[str]):
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _summary(report: dict) -> str:
    res = report["result"] or {}
    line = f"{report['subcommand']}: {report['status']}"
    if report["failure_reason"]:
        line += f" ({report['failure_reason']})"
    if report["subcommand"] == "infer" and res.get("groebner_basis"):
        line += "\n  " + "\n  ".join(res["groebner_basis"])
    if report["subcommand"] == "analyze" and "verdict" in res:
        line += f"; window {res['dimension_window']}, {res['verdict']}"
    if report["subcommand"] == "sample":
        line += f"; {res.get('count')} points"
    return line


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    run = Run(args.command, args)
    t0 = time.perf_counter()
    try:
        status, result, reason = COMMANDS[args.command](run, args)
    except InputError as exc:
        status, result, reason = "input-error", None, str(exc)
    except LoopError as exc:
        status, result, reason = "input-error", None, str(exc)
    except BudgetExceeded as exc:
        status, result, reason = "budget-exceeded", None, str(exc)
    report = run.report(status, result, reason, (time.perf_counter() - t0) * 1000)
    try:
        emit(report, args.json)
    except OSError as exc:
        print(f"cannot write {args.json}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(_summary(report), file=sys.stderr)
    return EXIT_FOR[status]


if __name__ == "__main__":
    sys.exit(main())
