"""Command-line surface.

Commands map to the library one-to-one and speak JSON only:

  vot solve <problem.json> [--out r.json] [--tol 1e-8]
  vot distance <a.json> <b.json> <metric.json> [--p 1] [--out r.json]
  vot audit <metric.json> --supports <pts.json> --mode mti|metric
  vot glue <planAB.json> <planBC.json> <nu.json>
  vot tuple <x.json> <y.json> <metric.json> [--p 1]

Exit codes: 0 ok, 1 audit found violations, 2 malformed or invalid input,
3 infeasible instance.  The VOT_TOL environment variable overrides the
default certificate tolerance; --tol overrides both.  All commands are
deterministic given identical files and flags (--seed is reserved for
randomized self-test harnesses and does not affect the shipped commands).
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dual, metrics, solver
from .errors import ProblemFormatError, VotError
from .measures import (
    MetricSpec,
    SupportSet,
    VectorMeasure,
    as_metric_spec,
    load_measure,
    load_metric,
    load_problem,
    load_supports,
    union_support,
)

EXIT_OK = 0
EXIT_AUDIT_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_INFEASIBLE = 3

DEFAULT_TOL = 1e-8


@dataclass
class RunConfig:
    """Parsed invocation: one command, its inputs, and the knobs."""

    command: str
    inputs: tuple[str, ...]
    out: str | None = None
    tol: float = DEFAULT_TOL
    p: float | None = None
    mode: str = "mti"
    seed: int | None = None


def _jsonable(obj):
    """Recursively convert to JSON-encodable values; non-finite floats
    become the "inf" / "-inf" sentinels used by the problem format."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _emit(doc: dict, out: str | None):
    text = json.dumps(_jsonable(doc), indent=2)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _solve_report_doc(report: solver.SolveReport, mu: VectorMeasure, nu: VectorMeasure,
                      lp_cost, tol: float) -> dict:
    pp = report.potentials
    slack = dual.check_optimality(report.plan, pp, lp_cost, tol=tol)
    return {
        "status": report.status.value,
        "value": report.primal_value,
        "gap": report.gap,
        "pivots": report.pivots,
        "plan": [list(e) for e in report.plan.entries],
        "potentials": {"phi": pp.phi, "psi": pp.psi},
        "slackness": "OK" if slack.ok else [
            [v.i, v.j, v.a, v.b, v.residual] for v in slack.violations
        ],
        "dual_value": dual.dual_value(pp, mu, nu),
    }


def cmd_solve(cfg: RunConfig) -> int:
    mu, nu, cost = load_problem(cfg.inputs[0])
    spec = as_metric_spec(cost)
    lp_cost = spec.lp_costs()
    report = solver.solve_primal(mu, nu, lp_cost)
    if not report.optimal:
        print("infeasible: +inf costs block every transference plan", file=sys.stderr)
        return EXIT_INFEASIBLE
    doc = _solve_report_doc(report, mu, nu, lp_cost, cfg.tol)
    if isinstance(cost, MetricSpec):
        doc["p"] = spec.p
    _emit(doc, cfg.out)
    return EXIT_OK


def cmd_distance(cfg: RunConfig) -> int:
    a = load_measure(cfg.inputs[0])
    b = load_measure(cfg.inputs[1])
    model, p_default = load_metric(cfg.inputs[2])
    p = cfg.p if cfg.p is not None else p_default
    spec = model.spec(a.support, b.support, p)
    report = metrics.transport_report(a, b, spec)
    if not report.optimal:
        print("infeasible: +inf costs block every transference plan", file=sys.stderr)
        return EXIT_INFEASIBLE
    w = report.primal_value if p == 1.0 else report.primal_value ** (1.0 / p)
    doc = _solve_report_doc(report, a, b, spec.lp_costs(), cfg.tol)
    doc["p"] = p
    doc["wp"] = w
    print(f"{w:.12g}")
    if cfg.out:
        _emit(doc, cfg.out)
    return EXIT_OK


def cmd_audit(cfg: RunConfig) -> int:
    model, p_default = load_metric(cfg.inputs[0])
    supports = load_supports(cfg.inputs[1]) if len(cfg.inputs) > 1 else None
    if supports is None:
        if not hasattr(model, "support"):
            raise ProblemFormatError(
                "--supports is required for generated (non-explicit) metrics"
            )
        supports = [model.support]
    spec = model.square_spec(supports, p_default)
    if cfg.mode == "mti":
        report = metrics.check_mti(spec, supports)
        doc = {
            "mode": "mti",
            "satisfied": report.satisfied,
            "violations": [
                {"i": v.i, "j": v.j, "k": v.k, "x": v.x, "y": v.y, "z": v.z,
                 "lhs": v.lhs, "rhs": v.rhs}
                for v in report.violations
            ],
        }
        ok = report.satisfied
    else:
        report = metrics.check_metric_axioms(spec, supports)
        doc = {
            "mode": "metric",
            "all_ok": report.all_ok,
            "symmetry": {"ok": report.symmetry.ok,
                         "violations": [list(v) for v in report.symmetry.violations]},
            "mti": {
                "satisfied": report.mti.satisfied,
                "violations": [
                    {"i": v.i, "j": v.j, "k": v.k, "x": v.x, "y": v.y, "z": v.z,
                     "lhs": v.lhs, "rhs": v.rhs}
                    for v in report.mti.violations
                ],
            },
            "zero_diagonal": {"ok": report.zero_diagonal.ok,
                              "violations": [list(v) for v in report.zero_diagonal.violations]},
            "off_diagonal_positive": {
                "ok": report.off_diagonal_positive.ok,
                "violations": [list(v) for v in report.off_diagonal_positive.violations],
            },
        }
        ok = report.all_ok
    _emit(doc, cfg.out)
    return EXIT_OK if ok else EXIT_AUDIT_FAILED


def _load_plan(path: str) -> solver.CouplingTensor:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ProblemFormatError(
            f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}"
        ) from None
    if not isinstance(data, dict) or "plan" not in data:
        raise ProblemFormatError(f'{path}: expected an object with a "plan" field')
    entries = data["plan"]
    if "species" in data:
        n = data["species"]
        m = data["source_size"]
        k = data["target_size"]
    elif "potentials" in data:
        n = len(data["potentials"]["phi"])
        m = len(data["potentials"]["phi"][0])
        k = len(data["potentials"]["psi"][0])
    else:
        raise ProblemFormatError(
            f"{path}: plan files need species/source_size/target_size or potentials"
        )
    try:
        return solver.CouplingTensor(n, m, k, [tuple(e) for e in entries])
    except (TypeError, ValueError) as e:
        raise ProblemFormatError(f"{path}: bad plan entries: {e}") from None


def cmd_glue(cfg: RunConfig) -> int:
    plan_ab = _load_plan(cfg.inputs[0])
    plan_bc = _load_plan(cfg.inputs[1])
    nu = load_measure(cfg.inputs[2])
    glued = metrics.glue_plans(plan_ab, plan_bc, nu, tol=cfg.tol)
    doc = {
        "composed": [list(e) for e in glued.composed.entries],
        "three_point": [list(e) for e in glued.three_point],
    }
    _emit(doc, cfg.out)
    return EXIT_OK


def cmd_tuple(cfg: RunConfig) -> int:
    sup_x = union_support(load_supports(cfg.inputs[0]))
    sup_y = union_support(load_supports(cfg.inputs[1]))
    model, p_default = load_metric(cfg.inputs[2])
    p = cfg.p if cfg.p is not None else p_default
    spec = model.spec(sup_x, sup_y, p)
    w = metrics.tuple_distance(sup_x, sup_y, spec)
    print(f"{w:.12g}")
    if cfg.out:
        _emit({"w": w, "p": p}, cfg.out)
    return EXIT_OK


_COMMANDS = {
    "solve": (cmd_solve, 1),
    "distance": (cmd_distance, 3),
    "audit": (cmd_audit, None),
    "glue": (cmd_glue, 3),
    "tuple": (cmd_tuple, 3),
}


def parse_args(argv) -> RunConfig:
    parser = argparse.ArgumentParser(
        prog="vot",
        description="Multi-species optimal transport: solve, distances, audits.",
    )
    parser.add_argument("--seed", type=int, default=None,
                        help="reserved for randomized self-tests")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve a problem file")
    p_solve.add_argument("problem")
    p_dist = sub.add_parser("distance", help="W_p between two measure files")
    p_dist.add_argument("a")
    p_dist.add_argument("b")
    p_dist.add_argument("metric")
    p_dist.add_argument("--p", type=float, default=None)
    p_audit = sub.add_parser("audit", help="check MTI or the metric axioms")
    p_audit.add_argument("metric")
    p_audit.add_argument("--supports", default=None)
    p_audit.add_argument("--mode", choices=["mti", "metric"], default="mti")
    p_glue = sub.add_parser("glue", help="compose two plans through a middle measure")
    p_glue.add_argument("plan_ab")
    p_glue.add_argument("plan_bc")
    p_glue.add_argument("nu")
    p_tuple = sub.add_parser("tuple", help="tuple distance between two point files")
    p_tuple.add_argument("x")
    p_tuple.add_argument("y")
    p_tuple.add_argument("metric")
    p_tuple.add_argument("--p", type=float, default=None)
    for p_cmd in (p_solve, p_dist, p_audit, p_glue, p_tuple):
        p_cmd.add_argument("--out", default=None)
        p_cmd.add_argument("--tol", type=float, default=None)

    ns = parser.parse_args(argv)
    env_tol = os.environ.get("VOT_TOL")
    tol = ns.tol if ns.tol is not None else (float(env_tol) if env_tol else DEFAULT_TOL)
    if ns.command == "solve":
        inputs = (ns.problem,)
    elif ns.command == "distance":
        inputs = (ns.a, ns.b, ns.metric)
    elif ns.command == "audit":
        inputs = (ns.metric,) if ns.supports is None else (ns.metric, ns.supports)
    elif ns.command == "glue":
        inputs = (ns.plan_ab, ns.plan_bc, ns.nu)
    else:
        inputs = (ns.x, ns.y, ns.metric)
    return RunConfig(
        command=ns.command,
        inputs=inputs,
        out=ns.out,
        tol=tol,
        p=getattr(ns, "p", None),
        mode=getattr(ns, "mode", "mti"),
        seed=ns.seed,
    )


def main(argv=None) -> int:
    try:
        cfg = parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT_ERROR if e.code not in (0, None) else 0
    handler, _ = _COMMANDS[cfg.command]
    try:
        return handler(cfg)
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except VotError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
