"""Scenario configs: parse, validate, run, and write JSON + CSV reports."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from ..conditions import (PowerParams, WeightedSetup, check_growth, check_power_conditions,
                          check_theorem10, check_theorem12, check_theorem2,
                          check_theorem4_orlicz, check_theorem7, kantorovich_probe,
                          random_triples)
from ..funcspace import AnalyticFunction, AnalyticKernel, StepFunction
from ..operators import build_hardy_kernels
from .descriptors import (DescriptorError, parse_function, parse_kernel, parse_nfunction,
                          parse_operator, parse_profile, parse_weight)
from .generators import generate, trial_rng
from .suites import SUITES, NormSpec, estimate_best_constant, slack, verify_inequality_suite

__all__ = ["CHECKERS", "CSV_COLUMNS", "ConfigError", "Scenario", "ScenarioOutcome",
           "load_config", "run_config", "run_scenario"]

CSV_COLUMNS = ("scenario", "trial", "probe", "lhs", "rhs", "slack", "verdict")
EXPECTATIONS = ("pass", "fail", "divergent", "violated", "inconclusive")
OUTCOME_OF_VERDICT = {"holds_estimated": "pass", "divergent_term": "divergent",
                      "violated_witness": "violated", "inconclusive_growth": "inconclusive"}


class ConfigError(ValueError):
    """The config cannot be parsed or names inputs that do not exist."""


@dataclass
class Scenario:
    name: str
    suite: str
    inputs: dict = field(default_factory=dict)
    seed: int = 0
    trials: int = 1
    grids: dict = field(default_factory=dict)
    expect: str = "pass"
    tol: Optional[float] = None


@dataclass
class ScenarioOutcome:
    scenario: Scenario
    outcome: str
    ok: bool
    report: dict
    rows: list
    error: Optional[str] = None

    def to_json(self):
        s = self.scenario
        return {"scenario": s.name, "suite": s.suite, "seed": s.seed, "trials": s.trials,
                "expect": s.expect, "outcome": self.outcome, "ok": self.ok,
                "error": self.error, "report": self.report}

    def csv_text(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            writer.writerow([_fmt(v) for v in row])
        return buf.getvalue()


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.floating):
        return _json_safe(float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


# ----------------------------------------------------------------------------
# Checker adapters: each parses its inputs up front and returns a runner
# ----------------------------------------------------------------------------

def _axis(grids, key, n_default=None):
    v = grids.get(key)
    if v is None:
        return None
    if isinstance(v, dict):
        return np.logspace(math.log10(v["lo"]), math.log10(v["hi"]), int(v["n"]))
    return np.asarray(v, dtype=float)


def _report_rows(name, trial, report):
    rows = []

    def walk(r):
        if r.sub_reports:
            for s in r.sub_reports:
                walk(s)
            return
        for pt, c in zip(r.points, r.constants):
            probe = f"{r.condition_id}@" + ",".join(f"{v:.12g}" for v in pt)
            rows.append((name, trial, probe, float(c), float(r.best_constant),
                         slack(float(c), float(r.best_constant)) if math.isfinite(c) else -math.inf,
                         r.verdict))
    walk(report)
    return rows


def _params(inp):
    return PowerParams(float(inp.get("p", 2.0)), float(inp.get("q", 2.0)),
                       None if inp.get("r") is None else float(inp["r"]))


def _prep_kantorovich(sc, base):
    K = parse_kernel(sc.inputs.get("kernel", "kantorovich"), base)
    params = _params(sc.inputs)
    eps = sc.inputs.get("eps")

    def run(trial):
        rep = kantorovich_probe(K, params, eps_sequence=eps, x_grid=_axis(sc.grids, "x"))
        d = rep.details
        rows = [(sc.name, trial, f"inner@x={x:.12g}", float(v), math.nan, math.nan, rep.verdict)
                for x, v in zip(rep.grid["x"], d.get("inner_norms", []))]
        rows += [(sc.name, trial, f"partial@eps={e:.12g}", float(p), math.nan, math.nan, rep.verdict)
                 for e, p in zip(d.get("eps", []), d.get("partial_integrals", []))]
        return rep.verdict, rep.to_json(), rows
    return run


def _step_profile_kernel(k: StepFunction):
    prof = AnalyticFunction(k, monotone="decreasing", primitive=k.cumulative,
                            kinks=tuple(k.breakpoints[1:]), name="step")
    return AnalyticKernel.sum_of(prof)


def _prep_growth(sc, base):
    n_triples = int(sc.inputs.get("triples", 1000))
    fixed = sc.inputs.get("kernel")
    K = parse_kernel(fixed, base) if fixed is not None else None
    prof = sc.inputs.get("profile", "random")
    k_fixed = None if prof == "random" or K is not None else parse_profile(prof, base)

    def run(trial):
        rng = trial_rng(sc.seed, trial)
        triples = random_triples(rng, n_triples,
                                 float(sc.inputs.get("lo", 1e-3)), float(sc.inputs.get("hi", 1e3)))
        if K is not None:
            kernels = [("K", K)]
        else:
            k = k_fixed if k_fixed is not None else generate(
                "decreasing_kernel_profile", size=int(sc.inputs.get("size", 8)), rng=rng)
            L = _step_profile_kernel(k) if isinstance(k, StepFunction) else AnalyticKernel.sum_of(k)
            hk = build_hardy_kernels(L)
            kernels = [("M1", hk.M1), ("M2", hk.M2)]
        reports, rows = [], []
        for label, ker in kernels:
            rep = check_growth(ker, triples)
            reports.append(rep)
            y, z, x = triples[:, 0], triples[:, 1], triples[:, 2]
            lhs = np.asarray(ker(x, y), dtype=float)
            rhs = np.asarray(ker(x, z), dtype=float) + np.asarray(ker(z, y), dtype=float)
            for (yy, zz, xx), l, r in zip(triples, lhs, rhs):
                rows.append((sc.name, trial, f"{label}@({yy:.12g},{zz:.12g},{xx:.12g})",
                             float(l), float(r), slack(float(l), float(r)), rep.verdict))
        verdict = min((r.verdict for r in reports),
                      key=("violated_witness", "divergent_term", "inconclusive_growth",
                           "holds_estimated").index)
        return verdict, {"reports": [r.to_json() for r in reports]}, rows
    return run


def _select(rep, sub):
    if sub is None:
        return rep
    found = rep.sub(sub)
    if found is None:
        raise ValueError(f"report has no sub-report {sub!r}")
    return found


def _constant_ok(rep, sc):
    target = sc.inputs.get("expect_constant")
    if target is None:
        return True, None
    value, tol = float(target[0]), float(target[1])
    ok = abs(rep.best_constant - value) <= tol * max(abs(value), 1e-300)
    return ok, {"expected_constant": value, "tolerance": tol, "best_constant": rep.best_constant}


def _checker(fn_build):
    """Wrap a function (scenario, base) -> (trial -> ConditionReport)."""
    def prep(sc, base):
        build = fn_build(sc, base)

        def run(trial):
            rep = _select(build(trial), sc.inputs.get("sub"))
            verdict = rep.verdict
            ok, info = _constant_ok(rep, sc)
            payload = rep.to_json()
            if info is not None:
                payload["constant_check"] = info
                if not ok and verdict == "holds_estimated":
                    verdict = "constant_mismatch"
            return verdict, payload, _report_rows(sc.name, trial, rep)
        return run
    return prep


def _build_power(sc, base):
    k = parse_profile(sc.inputs.get("k_star", "inv_sqrt"), base)
    params = _params(sc.inputs)
    only = sc.inputs.get("only")
    return lambda trial: check_power_conditions(k, params, x_grid=_axis(sc.grids, "x"), only=only)


def _build_theorem4(sc, base):
    k = parse_profile(sc.inputs.get("k_star", "indicator"), base)
    P1 = parse_nfunction(sc.inputs.get("phi1", {"kind": "power", "p": 2}))
    P2 = parse_nfunction(sc.inputs.get("phi2", {"kind": "power", "p": 2}))
    only = sc.inputs.get("only")
    return lambda trial: check_theorem4_orlicz(k, P1, P2, _axis(sc.grids, "lambda"),
                                               _axis(sc.grids, "x"), only=only)


def _build_theorem2(sc, base):
    inp = sc.inputs
    setup = WeightedSetup(parse_nfunction(inp.get("phi1", {"kind": "power", "p": 2})),
                          parse_nfunction(inp.get("phi2", {"kind": "power", "p": 2})),
                          parse_weight(inp.get("w"), base), parse_weight(inp.get("t"), base),
                          parse_weight(inp.get("u"), base), parse_weight(inp.get("v"), base),
                          parse_kernel(inp.get("kernel", "hardy"), base))
    return lambda trial: check_theorem2(setup, _axis(sc.grids, "lambda"), _axis(sc.grids, "x"))


def _build_theorem7(sc, base):
    Phi = parse_nfunction(sc.inputs.get("phi", {"kind": "power", "p": 2}))
    u = parse_weight(sc.inputs.get("u"), base)
    variant = sc.inputs.get("variant", "derived")
    return lambda trial: check_theorem7(Phi, u, _axis(sc.grids, "lambda"), _axis(sc.grids, "x"),
                                        variant=variant)


def _build_theorem10(sc, base):
    inp = sc.inputs
    L = parse_kernel(inp.get("kernel", {"sum": "exp"}), base)
    P1 = parse_nfunction(inp.get("phi1", {"kind": "power", "p": 2}))
    P2 = parse_nfunction(inp.get("phi2", {"kind": "power", "p": 2}))
    u1, u2 = parse_weight(inp.get("u1"), base), parse_weight(inp.get("u2"), base)
    return lambda trial: check_theorem10(L, P1, P2, u1, u2, _axis(sc.grids, "lambda"),
                                         _axis(sc.grids, "x"))


def _build_theorem12(sc, base):
    inp = sc.inputs
    K = parse_kernel(inp.get("kernel", {"sum": "exp"}), base)
    u1, u2 = parse_weight(inp.get("u1"), base), parse_weight(inp.get("u2"), base)
    params = _params(inp)
    return lambda trial: check_theorem12(K, params, u1, u2, _axis(sc.grids, "x"))


def _prep_best_constant(sc, base):
    inp = sc.inputs
    op = parse_operator(inp.get("operator", {"kind": "identity"}), base)

    def norm(d):
        d = d or {}
        return NormSpec(parse_nfunction(d.get("phi", {"kind": "power", "p": 2})),
                        parse_weight(d.get("weight"), base), bool(d.get("rearranged", False)))
    rho1, rho2 = norm(inp.get("norm1")), norm(inp.get("norm2"))
    family = [parse_function(f, base) for f in inp.get("family", [])]
    if not family:
        raise DescriptorError("best_constant needs a non-empty family")
    rng_ = inp.get("range")

    def run(trial):
        est = estimate_best_constant(op, rho1, rho2, family)
        ok = True if rng_ is None else (rng_[0] <= est.value < rng_[1])
        rows = [(sc.name, trial, f"input{i}", math.nan if r is None else float(r),
                 float(est.value), math.nan if r is None else slack(float(r), float(est.value)),
                 "pass" if ok else "fail") for i, r in enumerate(est.ratios)]
        return ("holds_estimated" if ok else "constant_mismatch"), \
            {"estimate": est.value, "ratios": est.ratios, "notes": est.notes, "range": rng_}, rows
    return run


CHECKERS: dict = {
    "kantorovich": _prep_kantorovich,
    "growth": _prep_growth,
    "power_conditions": _checker(_build_power),
    "theorem2": _checker(_build_theorem2),
    "theorem4": _checker(_build_theorem4),
    "theorem7": _checker(_build_theorem7),
    "theorem10": _checker(_build_theorem10),
    "theorem12": _checker(_build_theorem12),
    "best_constant": _prep_best_constant,
}


# ----------------------------------------------------------------------------
# Config handling
# ----------------------------------------------------------------------------

def _parse_scenario(i, raw, seen):
    if not isinstance(raw, dict):
        raise ConfigError(f"scenario {i} must be an object")
    suite = raw.get("suite")
    if suite not in SUITES and suite not in CHECKERS:
        raise ConfigError(f"scenario {i}: unknown suite {suite!r}")
    name = str(raw.get("name", f"{suite}_{i}"))
    if name in seen:
        raise ConfigError(f"scenario {i}: duplicate name {name!r}")
    seen.add(name)
    expect = raw.get("expect", "pass")
    if expect not in EXPECTATIONS:
        raise ConfigError(f"scenario {name}: expect must be one of {EXPECTATIONS}")
    trials = int(raw.get("trials", 1))
    if trials < 1:
        raise ConfigError(f"scenario {name}: trials must be positive")
    inputs = raw.get("inputs", {}) or {}
    grids = raw.get("grids", {}) or {}
    if not isinstance(inputs, dict) or not isinstance(grids, dict):
        raise ConfigError(f"scenario {name}: inputs and grids must be objects")
    tol = raw.get("tol")
    return Scenario(name, suite, inputs, int(raw.get("seed", 0)), trials, grids, expect,
                    None if tol is None else float(tol))


def load_config(path, seed=None, trials=None):
    """Parse and validate a config; raises ConfigError with line/column on bad JSON."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict) or not isinstance(data.get("scenarios", []), list):
        raise ConfigError(f"{path}: top level must be an object with a 'scenarios' list")
    seen = set()
    scenarios = [_parse_scenario(i, raw, seen) for i, raw in enumerate(data.get("scenarios", []))]
    for sc in scenarios:
        if seed is not None:
            sc.seed = int(seed)
        if trials is not None:
            sc.trials = int(trials)
    return scenarios


def _prepare(sc: Scenario, base: Path) -> Callable:
    try:
        if sc.suite in CHECKERS:
            return CHECKERS[sc.suite](sc, base)
        # resolve descriptors now so missing references fail before any output
        for key in ("f", "g", "kernel"):
            if key in sc.inputs:
                (parse_kernel if key == "kernel" else parse_function)(sc.inputs[key], base)
        if "profile" in sc.inputs and sc.inputs["profile"] != "random":
            parse_profile(sc.inputs["profile"], base)
        return None
    except (DescriptorError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"scenario {sc.name}: {exc}") from exc


def _resolve_refs(inputs, base):
    out = {}
    for k, v in inputs.items():
        if isinstance(v, dict) and "ref" in v and base is not None:
            with open(base / v["ref"]) as fh:
                out[k] = json.load(fh)
        else:
            out[k] = v
    return out


def run_scenario(sc: Scenario, base: Path = None, runner=None, jobs: int = 1) -> ScenarioOutcome:
    """Execute one scenario; failures are captured in the outcome."""
    try:
        if sc.suite in SUITES:
            resolved = Scenario(sc.name, sc.suite, _resolve_refs(sc.inputs, base), sc.seed,
                                sc.trials, sc.grids, sc.expect, sc.tol)
            res = verify_inequality_suite(sc.suite, resolved, jobs=jobs)
            outcome = "pass" if res.passed else "fail"
            rows = [(sc.name, r.trial, r.probe, r.lhs, r.rhs, r.slack, r.verdict) for r in res.rows]
            rows += [(sc.name, r.trial, "info:" + r.probe, r.lhs, r.rhs, r.slack, r.verdict)
                     for r in res.informational]
            return ScenarioOutcome(sc, outcome, outcome == sc.expect, _json_safe(res.to_json()), rows)
        runner = runner or CHECKERS[sc.suite](sc, base)
        verdicts, payloads, rows = [], [], []
        for trial in range(sc.trials):
            v, payload, r = runner(trial)
            verdicts.append(v)
            payloads.append(payload)
            rows.extend(r)
        outcomes = [OUTCOME_OF_VERDICT.get(v, "fail") for v in verdicts]
        order = ("violated", "fail", "divergent", "inconclusive", "pass")
        outcome = min(outcomes, key=order.index)
        report = payloads[0] if len(payloads) == 1 else {"trials": payloads}
        return ScenarioOutcome(sc, outcome, outcome == sc.expect, _json_safe(report), rows)
    except Exception as exc:  # isolate runtime failures per scenario
        return ScenarioOutcome(sc, "error", False, {}, [], f"{type(exc).__name__}: {exc}")


def run_config(path, out_dir=None, seed=None, trials=None, jobs: int = 1):
    """Run every scenario of a config. Returns (exit_status, outcomes).

    Nothing is written unless the whole config validates.
    """
    path = Path(path)
    scenarios = load_config(path, seed, trials)
    base = path.parent
    runners = [_prepare(sc, base) for sc in scenarios]
    outcomes = [run_scenario(sc, base, r, jobs) for sc, r in zip(scenarios, runners)]
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for o in outcomes:
            (out / f"{o.scenario.name}.json").write_text(json.dumps(o.to_json(), indent=2) + "\n")
            (out / f"{o.scenario.name}.csv").write_text(o.csv_text())
        summary = {"config": path.name,
                   "scenarios": [{"name": o.scenario.name, "suite": o.scenario.suite,
                                  "expect": o.scenario.expect, "outcome": o.outcome,
                                  "ok": o.ok, "error": o.error} for o in outcomes]}
        (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    status = 0 if all(o.ok for o in outcomes) else 1
    return status, outcomes
