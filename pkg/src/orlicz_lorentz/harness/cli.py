"""Command-line entry point."""

from __future__ import annotations

import argparse
import json
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from ..funcspace import StepFunction
from ..rearrange import decreasing_rearrangement, double_star
from ..orlicz import gauge_norm
from .descriptors import (DescriptorError, parse_function, parse_nfunction, parse_operator,
                          parse_weight)
from .scenario import CHECKERS, ConfigError, Scenario, run_config, run_scenario
from .suites import SUITES, verify_inequality_suite

__all__ = ["bundled_config", "main"]


def bundled_config(name: str = "paper_examples") -> Path:
    return Path(str(resources.files("orlicz_lorentz.harness") / "configs" / f"{name}.json"))


def _load_json_arg(value):
    """Inline JSON or a path to a JSON file."""
    p = Path(value)
    if p.exists():
        with open(p) as fh:
            return json.load(fh), p.parent
    try:
        return json.loads(value), None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"argument is neither a file nor JSON: {value!r} ({exc.msg})") from exc


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _emit(obj, out):
    text = json.dumps(obj, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_rearrange(args):
    data, base = _load_json_arg(args.input)
    f = parse_function(data, base)
    if not isinstance(f, StepFunction):
        raise DescriptorError("rearrange needs a step function input")
    res = decreasing_rearrangement(f)
    out = {"star": res.star.to_json(), "total_measure": res.total_measure}
    if args.t:
        ts = _floats(args.t)
        out["double_star"] = {f"{t:g}": float(double_star(f, t)) for t in ts}
    _emit(out, args.out)
    return 0


def _cmd_norm(args):
    data, base = _load_json_arg(args.input)
    f = parse_function(data, base)
    if args.rearranged:
        if not isinstance(f, StepFunction):
            raise DescriptorError("--rearranged needs a step function input")
        f = decreasing_rearrangement(f).star
    Phi = parse_nfunction(_load_json_arg(args.phi)[0])
    u = parse_weight(_load_json_arg(args.weight)[0] if args.weight else None, base)
    _emit({"gauge_norm": gauge_norm(f, Phi, u)}, args.out)
    return 0


def _cmd_apply(args):
    data, base = _load_json_arg(args.input)
    f = parse_function(data, base)
    op_desc, op_base = _load_json_arg(args.operator)
    op = parse_operator(op_desc, op_base or base)
    xs = _floats(args.x)
    vals = np.atleast_1d(np.asarray(op.apply(f, np.asarray(xs)), dtype=float))
    _emit({"operator": op.to_json(), "x": xs, "values": vals.tolist()}, args.out)
    return 0


def _scenario_from(args, suite, inputs, grids):
    return Scenario(name=args.name or suite, suite=suite, inputs=inputs, seed=args.seed,
                    trials=args.trials, grids=grids, expect=args.expect, tol=args.tol)


def _finish(outcome, out):
    if out:
        d = Path(out)
        d.mkdir(parents=True, exist_ok=True)
        (d / f"{outcome.scenario.name}.json").write_text(json.dumps(outcome.to_json(), indent=2) + "\n")
        (d / f"{outcome.scenario.name}.csv").write_text(outcome.csv_text())
    print(f"{outcome.scenario.name}: outcome={outcome.outcome} expect={outcome.scenario.expect}"
          + (f" error={outcome.error}" if outcome.error else ""))
    return 0 if outcome.ok else 1


def _cmd_check(args):
    request, base = _load_json_arg(args.request)
    suite = request.get("suite", args.condition)
    if suite not in CHECKERS:
        raise ConfigError(f"unknown checker {suite!r}; expected one of {sorted(CHECKERS)}")
    grids = dict(request.get("grids", {}))
    if args.grid:
        grids.setdefault("x", {"lo": 1e-3, "hi": 1e3, "n": args.grid})
        grids.setdefault("lambda", {"lo": 1e-4, "hi": 1e4, "n": max(3, args.grid // 2)})
    sc = _scenario_from(args, suite, request.get("inputs", {}), grids)
    sc.expect = request.get("expect", args.expect)
    runner = CHECKERS[suite](sc, base)
    return _finish(run_scenario(sc, base, runner), args.out)


def _cmd_verify(args):
    inputs = _load_json_arg(args.inputs)[0] if args.inputs else {}
    grids = {}
    if args.grid:
        key = "x" if args.suite == "oneil_kernel_bound" else "t"
        grids[key] = _floats(args.grid)
    sc = _scenario_from(args, args.suite, inputs, grids)
    return _finish(run_scenario(sc, None, jobs=args.jobs), args.out)


def _cmd_run(args):
    config = bundled_config(args.config[1:]) if args.config.startswith("@") else Path(args.config)
    status, outcomes = run_config(config, args.out, args.seed, args.trials, args.jobs)
    for o in outcomes:
        print(f"{o.scenario.name}: outcome={o.outcome} expect={o.scenario.expect}"
              + (f" error={o.error}" if o.error else ""))
    return status


def build_parser():
    p = argparse.ArgumentParser(prog="orlicz-lorentz",
                                description="Rearrangements, gauge norms, operators and condition checks.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("rearrange", help="decreasing rearrangement of a step function")
    r.add_argument("input", help="step function JSON (file or inline)")
    r.add_argument("--t", help="comma-separated t values for f**")
    r.add_argument("--out", help="output file (default stdout)")
    r.set_defaults(fn=_cmd_rearrange)

    n = sub.add_parser("norm", help="Luxemburg gauge norm")
    n.add_argument("input")
    n.add_argument("--phi", required=True, help='N-function JSON, e.g. {"kind":"power","p":2}')
    n.add_argument("--weight", help='weight JSON, e.g. {"constant":1}')
    n.add_argument("--rearranged", action="store_true", help="take the norm of f*")
    n.add_argument("--out")
    n.set_defaults(fn=_cmd_norm)

    a = sub.add_parser("apply", help="apply an operator at points")
    a.add_argument("input")
    a.add_argument("--operator", required=True, help='operator JSON, e.g. {"kind":"hardy_I"}')
    a.add_argument("--x", required=True, help="comma-separated evaluation points")
    a.add_argument("--out")
    a.set_defaults(fn=_cmd_apply)

    def common(sp, suite_choices=None):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--trials", type=int, default=1)
        sp.add_argument("--tol", type=float, default=None)
        sp.add_argument("--out", help="output directory for JSON and CSV reports")
        sp.add_argument("--name", help="scenario name used in reports")
        sp.add_argument("--expect", default="pass")
        sp.add_argument("--jobs", type=int, default=1, help="parallel trials")

    c = sub.add_parser("check", help="run a condition checker from a JSON request")
    c.add_argument("request", help='{"suite": ..., "inputs": {...}, "grids": {...}}')
    c.add_argument("--condition", default=None, choices=sorted(CHECKERS))
    c.add_argument("--grid", type=int, help="number of x grid points (log 1e-3..1e3)")
    common(c)
    c.set_defaults(fn=_cmd_check)

    v = sub.add_parser("verify", help="run an inequality suite")
    v.add_argument("suite", choices=sorted(SUITES))
    v.add_argument("--inputs", help="suite inputs JSON")
    v.add_argument("--grid", help="comma-separated probe values (t, or x for oneil_kernel_bound)")
    common(v)
    v.set_defaults(fn=_cmd_verify)

    u = sub.add_parser("run", help="run a scenario config (use @paper_examples for the bundled one)")
    u.add_argument("config")
    u.add_argument("--seed", type=int, default=None, help="override every scenario seed")
    u.add_argument("--trials", type=int, default=None, help="override every trial count")
    u.add_argument("--out", default=None)
    u.add_argument("--jobs", type=int, default=1)
    u.set_defaults(fn=_cmd_run)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, DescriptorError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
