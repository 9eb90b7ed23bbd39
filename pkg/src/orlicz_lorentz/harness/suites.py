"""Inequality suites and best-constant probes."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .._quadrature import integrate_callable
from ..funcspace import (AnalyticFunction, Grid2DKernel, StepFunction,
                         cumulative_integral)
from ..operators import OperatorSpec, convolve, oneil_majorant
from ..orlicz import NFunction, Weight, gauge_norm
from ..rearrange import decreasing_rearrangement, double_star, iterated_rearrangement
from .descriptors import parse_function, parse_kernel, parse_profile
from .generators import generate, trial_rng

__all__ = ["EXACT_TOL", "QUAD_TOL", "SUITES", "BestConstant", "NormSpec", "ProbeRow",
           "SuiteResult", "estimate_best_constant", "slack", "verify_inequality_suite"]

EXACT_TOL = 1e-9
QUAD_TOL = 1e-6
EQUALITY_TOL = 1e-12


def slack(lhs: float, rhs: float) -> float:
    """(rhs - lhs) scaled by max(|rhs|, |lhs|, 1e-300)."""
    return (rhs - lhs) / max(abs(rhs), abs(lhs), 1e-300)


@dataclass
class ProbeRow:
    trial: int
    probe: str
    lhs: float
    rhs: float
    slack: float
    verdict: str
    kind: str = "inequality"


@dataclass
class SuiteResult:
    suite: str
    tolerance: float
    rows: list
    trial_worst: list
    passed: bool
    witnesses: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    informational: list = field(default_factory=list)

    @property
    def worst_slack(self):
        return min(self.trial_worst) if self.trial_worst else 0.0

    def gap_stats(self):
        s = np.array([r.slack for r in self.rows if r.kind == "inequality"])
        if s.size == 0:
            return {"min": 0.0, "median": 0.0, "max": 0.0}
        return {"min": float(s.min()), "median": float(np.median(s)), "max": float(s.max())}

    def to_json(self):
        return {"suite": self.suite, "tolerance": self.tolerance, "passed": self.passed,
                "worst_slack": self.worst_slack, "trial_worst": self.trial_worst,
                "gap_stats": self.gap_stats(), "witnesses": self.witnesses,
                "notes": self.notes, "n_rows": len(self.rows),
                "informational_worst": (min(r.slack for r in self.informational)
                                        if self.informational else None)}


# ----------------------------------------------------------------------------
# Inputs
# ----------------------------------------------------------------------------

def _input_function(inputs, key, rng, kind="step"):
    if key in inputs:
        f = parse_function(inputs[key])
        if not isinstance(f, StepFunction):
            raise ValueError(f"input {key!r} must be a step function")
        return f
    return generate(kind, size=int(inputs.get("size", 8)), rng=rng,
                    ties=bool(inputs.get("ties", False)))


def _probes(grids, key, default):
    vals = grids.get(key) if grids else None
    return np.asarray(default if vals is None else vals, dtype=float)


# ----------------------------------------------------------------------------
# Exact step suites
# ----------------------------------------------------------------------------

def _oneil2(inputs, grids, rng):
    f = _input_function(inputs, "f", rng)
    g = _input_function(inputs, "g", rng)
    conv = convolve(f, g, 1).exact
    span = max(f.support_end + g.support_end, 1e-300)
    out = []
    for t in _probes(grids, "t", span * np.geomspace(1e-2, 1.0, 20)):
        rhs, _ = oneil_majorant(f, g, float(t))
        out.append((f"t={t:.12g}", float(conv.star_integral(float(t))), float(rhs), "inequality"))
    return out, []


def _chain_terms(fs: StepFunction, gs: StepFunction, t: float):
    """Closed forms of every quantity in the two-step chain at t."""
    bp = np.union1d(fs.breakpoints, gs.breakpoints)
    a, b = bp[:-1], bp[1:]
    mid = 0.5 * (a + b)
    fv, gv = np.asarray(fs(mid)), np.asarray(gs(mid))
    If, Ig = float(fs.cumulative(t)), float(gs.cumulative(t))
    tail = math.fsum(fv * gv * np.clip(b - np.maximum(a, t), 0.0, None))
    hi = np.minimum(b, t)
    w = np.clip(hi - a, 0.0, None)
    moment = math.fsum(fv * gv * w * (a + a + w) / 2)
    head = moment + t * tail                     # int_0^t int_s^inf f* g*
    Ig_a = np.asarray(gs.cumulative(a))
    cross = math.fsum(fv * (Ig_a * w + gv * w * w / 2))
    inner = If * Ig - cross                      # int_0^t f*(s) int_s^t g*
    return If, Ig, tail, head, inner


def _hlp_chain(inputs, grids, rng):
    f = _input_function(inputs, "f", rng)
    g = _input_function(inputs, "g", rng)
    fs, gs = decreasing_rearrangement(f).star, decreasing_rearrangement(g).star
    conv = convolve(f, g, 1).exact
    span = max(f.support_end + g.support_end, 1e-300)
    out = []
    for t in _probes(grids, "t", span * np.geomspace(1e-2, 1.0, 20)):
        t = float(t)
        If, Ig, tail, head, inner = _chain_terms(fs, gs, t)
        tag = f"t={t:.12g}"
        out.append((f"step1@{tag}", head, inner + t * tail, "inequality"))
        out.append((f"step2@{tag}", inner + t * tail, If * Ig + t * tail, "inequality"))
        out.append((f"domination@{tag}", float(conv.star_integral(t)), If * Ig + head, "inequality"))
    return out, []


def _grid_apply_step(K: Grid2DKernel, f: StepFunction) -> StepFunction:
    masses = np.diff(np.asarray(f.cumulative(K.y_breakpoints), dtype=float))
    return StepFunction(K.x_breakpoints, K.values @ masses)


def _majorization16(inputs, grids, rng):
    if "kernel" in inputs:
        K = parse_kernel(inputs["kernel"])
        if not isinstance(K, Grid2DKernel):
            raise ValueError("majorization16 needs a grid kernel")
    else:
        K = generate("grid_kernel", size=int(inputs.get("grid_size", 64)), rng=rng)
    f = _input_function(inputs, "f", rng)
    L = iterated_rearrangement(K)
    fs = decreasing_rearrangement(f).star
    TK = _grid_apply_step(K, f)
    TL = _grid_apply_step(L, fs)
    span = float(K.x_breakpoints[-1])
    out = []
    for t in _probes(grids, "t", span * np.geomspace(1e-2, 1.0, 20)):
        out.append((f"t={t:.12g}", float(double_star(TK, float(t))), float(double_star(TL, float(t))),
                    "inequality"))
    return out, []


def _profile_moment(k):
    """rho -> int_0^rho k(r) r dr."""
    if isinstance(k, StepFunction):
        a, b, v = k.breakpoints[:-1], k.breakpoints[1:], k.values

        def G(rho):
            rho = np.asarray(rho, dtype=float)[..., None]
            c = np.clip(rho, a, b)
            return np.sum(v * (c * c - a * a) / 2, axis=-1)
        return G
    if getattr(k, "name", "") == "exp":
        def G(rho):
            rho = np.asarray(rho, dtype=float)
            with np.errstate(invalid="ignore", over="ignore"):
                out = -np.expm1(-rho) - rho * np.exp(-rho)
            return np.where(np.isinf(rho), 1.0, out)
        return G
    kr = AnalyticFunction(lambda r: np.asarray(k(r)) * np.asarray(r), kinks=getattr(k, "kinks", ()))
    return lambda rho: np.asarray(cumulative_integral(kr, np.asarray(rho, dtype=float)))


def _rect_integral(G, X, Y):
    """Integral of k(|(x, y)|) over [0, X] x [0, Y] in polar form."""
    if X <= 0 or Y <= 0:
        return 0.0
    th0 = math.atan2(Y, X)
    first = integrate_callable(lambda th: G(X / np.cos(th)), 0.0, th0)
    second = integrate_callable(lambda th: G(Y / np.sin(th)), th0, math.pi / 2)
    return first + second


def _oneil_kernel_bound(inputs, grids, rng):
    k = parse_profile(inputs.get("profile", "exp"))
    fs = (_input_function(inputs, "f", rng, "decreasing_step"))
    fs = decreasing_rearrangement(fs).star
    G = _profile_moment(k)
    a, b, v = fs.breakpoints[:-1], fs.breakpoints[1:], fs.values
    c = 2.0 / math.sqrt(math.pi)
    out, info = [], []
    for x in _probes(grids, "x", np.geomspace(1e-2, 1e2, 20)):
        x = float(x)
        rect = [_rect_integral(G, x, float(e)) for e in fs.breakpoints]
        lhs = math.fsum(v * np.diff(rect)) / x
        binding = math.fsum(v * (np.asarray(G(np.sqrt(x * b))) - np.asarray(G(np.sqrt(x * a))))) * 2 / x
        measure = math.fsum(v * (np.asarray(G(c * np.sqrt(x * b))) - np.asarray(G(c * np.sqrt(x * a))))) \
            * 2 / (c * c * x)
        out.append((f"x={x:.12g}", lhs, binding, "inequality"))
        info.append((f"measure@x={x:.12g}", lhs, measure, "inequality"))
    return out, info


def _random_points(inputs, rng):
    n = int(inputs.get("points", 1000))
    box = float(inputs.get("box", 10.0))
    # uniform on (0, box]
    return box * (1.0 - rng.uniform(size=n)), box * (1.0 - rng.uniform(size=n))


def _tighter_bound(inputs, grids, rng):
    if inputs.get("profile") == "random":
        k = generate("decreasing_kernel_profile", size=int(inputs.get("size", 8)), rng=rng)
    else:
        k = parse_profile(inputs.get("profile", "exp"))
    x, y = _random_points(inputs, rng)
    lhs = np.asarray(k(np.sqrt(x * x + y * y)), dtype=float)
    rhs = np.asarray(k(np.sqrt(x * y)), dtype=float)
    return [(f"({xi:.12g},{yi:.12g})", float(l), float(r), "inequality")
            for xi, yi, l, r in zip(x, y, lhs, rhs)], []


def _sandwich(inputs, grids, rng):
    x, y = _random_points(dict({"points": 10000}, **inputs), rng)
    K = (x * x + y * y) ** -0.75
    lower = 2.0 ** -0.75 * (x + y) ** -1.5
    upper = 2.0 ** 0.75 * (x + y) ** -1.5
    out = []
    for xi, yi, lo, k, up in zip(x, y, lower, K, upper):
        tag = f"({xi:.12g},{yi:.12g})"
        out.append((f"lower@{tag}", float(lo), float(k), "inequality"))
        out.append((f"upper@{tag}", float(k), float(up), "inequality"))
    box = float(inputs.get("box", 10.0))
    for d in box * (1.0 - rng.uniform(size=int(inputs.get("diagonal_points", 100)))):
        kd = (2 * d * d) ** -0.75
        out.append((f"equality@({d:.12g},{d:.12g})", float(kd), float(2.0 ** 0.75 * (2 * d) ** -1.5),
                    "equality"))
    return out, []


SUITES = {
    "oneil2": (_oneil2, EXACT_TOL),
    "hlp_chain": (_hlp_chain, EXACT_TOL),
    "majorization16": (_majorization16, QUAD_TOL),
    "oneil_kernel_bound": (_oneil_kernel_bound, QUAD_TOL),
    "sandwich": (_sandwich, EXACT_TOL),
    "tighter_bound": (_tighter_bound, EXACT_TOL),
}


def _rows(trial, items, tol):
    rows = []
    for probe, lhs, rhs, kind in items:
        s = slack(lhs, rhs)
        ok = abs(s) <= EQUALITY_TOL if kind == "equality" else s >= -tol
        rows.append(ProbeRow(trial, probe, lhs, rhs, s, "pass" if ok else "fail", kind))
    return rows


def verify_inequality_suite(suite: str, scenario=None, *, seed: int = 0, trials: int = 1,
                            inputs: Optional[dict] = None, grids: Optional[dict] = None,
                            tol: Optional[float] = None, jobs: int = 1) -> SuiteResult:
    """Run ``suite`` over ``trials`` seeded trials; fields of ``scenario`` override the keywords."""
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; expected one of {sorted(SUITES)}")
    if scenario is not None:
        seed, trials = scenario.seed, scenario.trials
        inputs, grids = scenario.inputs, scenario.grids
        tol = scenario.tol if scenario.tol is not None else tol
    fn, default_tol = SUITES[suite]
    tol = default_tol if tol is None else float(tol)
    inputs = dict(inputs or {})
    grids = dict(grids or {})

    def one(trial):
        items, info = fn(inputs, grids, trial_rng(seed, trial))
        return _rows(trial, items, tol), _rows(trial, info, tol)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, range(trials)))
    else:
        results = [one(t) for t in range(trials)]

    rows, info, worst, witnesses = [], [], [], []
    for trial, (r, i) in enumerate(results):
        rows.extend(r)
        info.extend(i)
        ineq = [row.slack for row in r if row.kind == "inequality"]
        worst.append(min(ineq) if ineq else 0.0)
        for row in r:
            if row.verdict == "fail" and len(witnesses) < 10:
                witnesses.append({"trial": trial, "probe": row.probe, "lhs": row.lhs,
                                  "rhs": row.rhs, "slack": row.slack})
    passed = all(row.verdict == "pass" for row in rows)
    notes = []
    if info:
        notes.append("informational rows use the measure-correct rearranged kernel")
    return SuiteResult(suite, tol, rows, worst, passed, witnesses, notes, info)


# ----------------------------------------------------------------------------
# Best constants
# ----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class NormSpec:
    """Gauge norm of (Phi, weight), optionally applied to the rearrangement."""

    Phi: NFunction
    weight: Weight
    rearranged: bool = False

    def __call__(self, f):
        if self.rearranged:
            if isinstance(f, StepFunction):
                f = decreasing_rearrangement(f).star
            elif getattr(f, "monotone", None) != "decreasing":
                raise ValueError("rearranged norms of analytic inputs need a nonincreasing function")
        return gauge_norm(f, self.Phi, self.weight)


@dataclass
class BestConstant:
    value: float
    ratios: list
    notes: list

    def __float__(self):
        return float(self.value)


def estimate_best_constant(op: OperatorSpec, rho1: NormSpec, rho2: NormSpec,
                           family: Sequence) -> BestConstant:
    """sup over the family of rho1(T f) / rho2(f): a lower bound for the operator norm."""
    ratios, notes = [], []
    for i, f in enumerate(family):
        denom = rho2(f)
        if not math.isfinite(denom) or denom == 0:
            notes.append(f"input {i} skipped: rho2 = {denom}")
            ratios.append(None)
            continue
        num = rho1(op.image(f) if not isinstance(f, StepFunction) or op.kind != "identity" else f)
        if not math.isfinite(num):
            notes.append(f"input {i} skipped: rho1(Tf) = {num}")
            ratios.append(None)
            continue
        ratios.append(num / denom)
    usable = [r for r in ratios if r is not None]
    if not usable:
        raise ValueError("no input in the family has finite nonzero norms")
    return BestConstant(max(usable), ratios, notes)
