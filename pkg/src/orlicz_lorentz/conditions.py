"""Grid-based checkers for weighted modular-inequality conditions.

Each checker is a semi-decision procedure. On a finite (lam, x) grid it
finds, at every point, the smallest constant ``C`` for which the condition
holds with ``c = 1/C``, then reports the supremum. The verdict is one of

* ``violated_witness`` -- a point where no positive constant works;
* ``divergent_term`` -- an auxiliary functional or left side is infinite;
* ``inconclusive_growth`` -- the supremum still grows by more than 1% on a
  refined, extended grid and sits on the grid boundary;
* ``holds_estimated`` -- otherwise.

The order above is also the aggregation priority for composite reports.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from ._quadrature import NODES, KRONROD_WEIGHTS, QuadratureError
from .funcspace import (DEFAULT_QUAD, AnalyticFunction, AnalyticKernel,
                        Grid2DKernel, HardyKernel, QuadratureSpec, StepFunction,
                        cumulative_integral, integrate_callable,
                        integrate_tail_callable)
from .operators import build_hardy_kernels, step_I2
from .orlicz import NFunction, PowerN, Weight

__all__ = [
    "ConditionReport", "PowerParams", "VERDICTS", "WeightedSetup",
    "check_growth", "check_power_conditions", "check_theorem10",
    "check_theorem12", "check_theorem2", "check_theorem4_orlicz",
    "check_theorem7", "composition_is_convex", "default_lambda_grid",
    "default_x_grid", "kantorovich_probe", "random_triples", "refine_grid",
]

VERDICTS = ("violated_witness", "divergent_term", "inconclusive_growth", "holds_estimated")
_RANK = {v: i for i, v in enumerate(VERDICTS)}


def default_lambda_grid():
    return np.logspace(-4, 4, 25)


def default_x_grid():
    return np.logspace(-3, 3, 49)


def refine_grid(grid):
    """Log midpoints plus one decade of extension on each side, same spacing."""
    g = np.unique(np.asarray(grid, dtype=float))
    logs = np.log(g)
    if g.size == 1:
        return np.exp(logs[0] + np.log(10.0) * np.array([-1.0, 0.0, 1.0]))
    step = float(np.median(np.diff(logs))) / 2
    n_ext = max(1, int(math.ceil(math.log(10.0) / step)))
    lo = logs[0] - step * np.arange(n_ext, 0, -1)
    hi = logs[-1] + step * np.arange(1, n_ext + 1)
    mids = 0.5 * (logs[:-1] + logs[1:])
    out = np.exp(np.concatenate([lo, logs, mids, hi]))
    # keep the original points bit-identical
    out[n_ext:n_ext + g.size] = g
    return np.unique(out)


# ----------------------------------------------------------------------------
# Parameters and setups
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerParams:
    """Exponents 1 < p <= q < inf, with an optional extra exponent r."""

    p: float
    q: float
    r: Optional[float] = None

    def __post_init__(self):
        if not (1 < self.p <= self.q < math.inf):
            raise ValueError("need 1 < p <= q < inf")
        if self.r is not None and not self.r > 1:
            raise ValueError("r must exceed 1")

    @property
    def p_prime(self):
        return self.p / (self.p - 1.0)

    @property
    def q_prime(self):
        return self.q / (self.q - 1.0)

    @property
    def r_prime(self):
        return None if self.r is None else self.r / (self.r - 1.0)


@dataclass(frozen=True, eq=False)
class WeightedSetup:
    """Phi1, Phi2 with range weights (w, t_w), domain weights (u, v) and kernel K."""

    Phi1: NFunction
    Phi2: NFunction
    w: Weight
    t_w: Weight
    u: Weight
    v: Weight
    K: object


def composition_is_convex(Phi1: NFunction, Phi2: NFunction, grid=None, tol=1e-9) -> bool:
    """Second-difference test of s -> Phi1(Phi2^{-1}(s)) on a log grid."""
    s = np.logspace(-6, 6, 241) if grid is None else np.asarray(grid, dtype=float)
    g = np.asarray(Phi1(np.asarray(Phi2.inverse(s))), dtype=float)
    slopes = np.diff(g) / np.diff(s)
    scale = np.maximum(np.abs(slopes[1:]), 1.0)
    return bool(np.all(np.diff(slopes) >= -tol * scale))


# ----------------------------------------------------------------------------
# Reports
# ----------------------------------------------------------------------------

@dataclass
class ConditionReport:
    condition_id: str
    verdict: str
    best_constant: float
    grid: dict = field(default_factory=dict)
    points: list = field(default_factory=list)
    constants: list = field(default_factory=list)
    witnesses: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    history: list = field(default_factory=list)
    sub_reports: list = field(default_factory=list)
    details: dict = field(default_factory=dict)
    _checks: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if self.verdict == "violated_witness" and not self.witnesses and not self.sub_reports:
            raise ValueError("a violated_witness verdict needs a witness")

    @property
    def holds(self):
        return self.verdict == "holds_estimated"

    def sub(self, condition_id):
        for r in self.sub_reports:
            if r.condition_id == condition_id:
                return r
            found = r.sub(condition_id) if r.sub_reports else None
            if found is not None:
                return found
        return None

    def holds_with(self, C: float) -> bool:
        """Re-evaluate every grid point with c = 1/C."""
        if self.verdict in ("violated_witness", "divergent_term"):
            return False
        if self.sub_reports:
            return all(r.holds_with(C) for r in self.sub_reports)
        c = math.inf if C == 0 else 1.0 / C
        return all(check(c) for check in self._checks)

    def to_json(self):
        def clean(x):
            if isinstance(x, float) and not math.isfinite(x):
                return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
            if isinstance(x, (list, tuple)):
                return [clean(v) for v in x]
            if isinstance(x, dict):
                return {k: clean(v) for k, v in x.items()}
            if isinstance(x, np.floating):
                return clean(float(x))
            if isinstance(x, np.ndarray):
                return clean(x.tolist())
            return x
        return clean({
            "condition_id": self.condition_id,
            "verdict": self.verdict,
            "best_constant": self.best_constant,
            "grid": self.grid,
            "points": [list(p) for p in self.points],
            "constants": self.constants,
            "witnesses": self.witnesses,
            "notes": self.notes,
            "history": self.history,
            "details": self.details,
            "sub_reports": [r.to_json() for r in self.sub_reports],
        })

    def csv_rows(self):
        """One row per grid point: (condition_id, point, constant, verdict)."""
        rows = []
        for p, c in zip(self.points, self.constants):
            rows.append((self.condition_id, ";".join(f"{v:.12g}" for v in p), c, self.verdict))
        for r in self.sub_reports:
            rows.extend(r.csv_rows())
        return rows

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["condition_id", "point", "constant", "verdict"])
        for cid, pt, c, v in self.csv_rows():
            writer.writerow([cid, pt, f"{c:.12g}", v])
        return buf.getvalue()


def _aggregate(condition_id, subs, notes=(), details=None):
    subs = list(subs)
    if not subs:
        return ConditionReport(condition_id, "holds_estimated", 0.0, notes=list(notes),
                               details=details or {})
    verdict = min((r.verdict for r in subs), key=_RANK.get)
    finite = [r.best_constant for r in subs if r.verdict == "holds_estimated"]
    best = max(finite) if finite and verdict == "holds_estimated" else (
        max(r.best_constant for r in subs))
    return ConditionReport(condition_id, verdict, best, sub_reports=subs,
                           notes=list(notes), details=details or {})


@dataclass
class _Point:
    coords: tuple
    constant: float
    status: str
    lhs: float = math.nan
    rhs: float = math.nan
    check: Optional[Callable] = None


def _solve(lhs: Callable, rhs: float, degree: Optional[float] = None, coords=()):
    """Smallest C with lhs(1/C) <= rhs, for lhs nondecreasing in c."""
    if math.isnan(rhs) or math.isinf(rhs):
        return _Point(coords, math.inf, "divergent", math.nan, rhs)
    base = lhs(1.0)
    if math.isnan(base):
        return _Point(coords, math.inf, "divergent", base, rhs)
    check = lambda c: lhs(c) <= rhs * (1 + 1e-9) + 1e-300
    if base == 0.0:
        return _Point(coords, 0.0, "ok", 0.0, rhs, check)
    if degree is not None:
        if math.isinf(base):
            return _Point(coords, math.inf, "divergent", base, rhs)
        if rhs <= 0:
            return _Point(coords, math.inf, "violated", base, rhs)
        C = (base / rhs) ** (1.0 / degree)
        return _Point(coords, C, "ok", base, rhs, check)
    c = 1.0
    if lhs(c) <= rhs:
        while lhs(c * 2.0) <= rhs:
            c *= 2.0
            if c > 1e300:
                return _Point(coords, 0.0, "ok", base, rhs, check)
        lo, hi = c, c * 2.0
    else:
        saw_finite = False
        while lhs(c) > rhs:
            saw_finite = saw_finite or math.isfinite(lhs(c))
            c *= 0.5
            if c < 1e-300:
                status = "violated" if saw_finite or rhs <= 0 else "divergent"
                return _Point(coords, math.inf, status, base, rhs)
        lo, hi = c, c * 2.0
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if not lo < mid < hi or hi / lo - 1 < 1e-12:
            break
        if lhs(mid) <= rhs:
            lo = mid
        else:
            hi = mid
    return _Point(coords, 1.0 / lo, "ok", base, rhs, check)


# ----------------------------------------------------------------------------
# Integration helpers
# ----------------------------------------------------------------------------

def _integral(g, lo, hi, points=(), q: QuadratureSpec = DEFAULT_QUAD):
    """Integral of vectorized g over [lo, hi] (hi may be inf); inf when divergent."""
    if hi <= lo:
        return 0.0
    pts = tuple(p for p in points if lo < p < hi and math.isfinite(p))
    try:
        if math.isinf(hi):
            return integrate_tail_callable(g, lo, points=pts, **q.kwargs())
        return integrate_callable(g, lo, hi, points=pts, **q.kwargs())
    except QuadratureError as exc:
        if exc.partial is not None and math.isfinite(float(np.max(exc.partial))):
            return float(np.max(exc.partial))
        raise


def _safe(fn):
    """Evaluate fn with 0 * inf treated as 0 and overflow as inf."""
    def g(y):
        with np.errstate(all="ignore"):
            out = np.asarray(fn(y), dtype=float)
        return np.where(np.isnan(out), 0.0, out)
    return g


class _FrozenRule:
    """Fixed Kronrod nodes on dyadic panels clustered at both ends of [lo, hi]."""

    def __init__(self, lo, hi, points=(), depth=40):
        s = [0.0, 1.0] + [2.0 ** -k for k in range(1, depth)] + [1 - 2.0 ** -k for k in range(2, depth)]
        edges = np.unique(lo + (hi - lo) * np.array(s))
        edges = np.unique(np.concatenate([edges, [p for p in points if lo < p < hi]]))
        a, b = edges[:-1], edges[1:]
        half = 0.5 * (b - a)
        self.nodes = (0.5 * (a + b))[:, None] + half[:, None] * NODES[None, :]
        self.weights = half[:, None] * KRONROD_WEIGHTS[None, :]
        self.nodes = self.nodes.ravel()
        self.weights = self.weights.ravel()


class _Inner:
    """lhs(c) = multiplier * int_lo^hi Psi(c scale h(y)) m(y) dy, built per x.

    Power Psi scales as c^p, so one quadrature per x serves every lam.
    """

    def __init__(self, Psi: NFunction, h, m, lo, hi, points=(), q=DEFAULT_QUAD):
        self.Psi, self.h, self.m, self.lo, self.hi = Psi, h, m, lo, hi
        self.points, self.q = points, q
        self._base = None
        self._rule = None

    def lhs(self, scale, multiplier=1.0):
        Psi = self.Psi
        if isinstance(Psi, PowerN):
            if self._base is None:
                self._base = _integral(_safe(lambda y: Psi(np.asarray(self.h(y))) * np.asarray(self.m(y))),
                                       self.lo, self.hi, self.points, self.q)
            base = self._base
            if math.isinf(base):
                return (lambda c: math.inf), Psi.p
            total = multiplier * base * scale ** Psi.p
            return (lambda c: total * c ** Psi.p if total != 0 else 0.0), Psi.p
        check = _integral(_safe(lambda y: Psi(scale * np.asarray(self.h(y))) * np.asarray(self.m(y))),
                          self.lo, self.hi, self.points, self.q)
        if math.isinf(check):
            return (lambda c: math.inf), None
        if self._rule is None:
            rule = _FrozenRule(self.lo, self.hi, self.points)
            with np.errstate(all="ignore"):
                hv = np.asarray(self.h(rule.nodes), dtype=float)
                mv = np.asarray(self.m(rule.nodes), dtype=float) * rule.weights
            self._rule = (np.where(mv == 0, 0.0, hv), mv)
        hv, mv = self._rule

        def lhs(c):
            with np.errstate(all="ignore"):
                vals = np.asarray(Psi(c * scale * hv), dtype=float) * mv
            return multiplier * math.fsum(np.where(np.isnan(vals), 0.0, vals))
        return lhs, None


def _pointwise_lhs(Psi: NFunction, value, multiplier=1.0):
    """lhs(c) = multiplier * Psi(c value); homogeneous for power Psi."""
    if isinstance(Psi, PowerN):
        base = multiplier * float(Psi(value))
        return (lambda c: base * c ** Psi.p if base != 0 else 0.0), Psi.p
    return (lambda c: multiplier * float(Psi(c * value))), None


def _compose(outer: NFunction, inner_inv: NFunction, s):
    """outer(inner_inv^{-1}(s)); inf stays inf."""
    if math.isinf(s) or math.isnan(s):
        return math.inf
    return float(outer(float(inner_inv.inverse(s))))


class _LamIntegral:
    """lam -> int_a^b Phi(lam g(y)) m(y) dy, with a lam^p fast path for power Phi."""

    def __init__(self, Phi, g, m, a, b, points=(), q=DEFAULT_QUAD):
        self.Phi, self.g, self.m, self.a, self.b = Phi, g, m, a, b
        self.points, self.q = points, q
        self._base = None

    def __call__(self, lam):
        Phi = self.Phi
        if isinstance(Phi, PowerN):
            if self._base is None:
                self._base = _integral(_safe(lambda y: Phi(np.asarray(self.g(y))) * np.asarray(self.m(y))),
                                       self.a, self.b, self.points, self.q)
            return self._base * lam ** Phi.p if self._base != 0 else 0.0
        return _integral(_safe(lambda y: Phi(lam * np.asarray(self.g(y))) * np.asarray(self.m(y))),
                         self.a, self.b, self.points, self.q)


# ----------------------------------------------------------------------------
# Sweeps
# ----------------------------------------------------------------------------

def _boundary(point, axes):
    return any(v <= ax[0] * (1 + 1e-12) or v >= ax[-1] * (1 - 1e-12) for v, ax in zip(point, axes))


def _sweep(condition_id, evaluate, axes, axis_names, refine=True, notes=(), details=None):
    """Evaluate on the grid, then on the refined superset grid."""
    cache = {}

    def run(grids):
        pts = []
        for coords in _product(grids):
            if coords not in cache:
                cache[coords] = evaluate(*coords)
            pts.append(cache[coords])
        return pts

    axes = [np.asarray(a, dtype=float) for a in axes]
    coarse = run(axes)
    stages = [(axes, coarse)]
    if refine:
        fine_axes = [refine_grid(a) for a in axes]
        stages.append((fine_axes, run(fine_axes)))

    final_axes, pts = stages[-1]
    history = []
    for ax, stage in stages:
        ok = [p for p in stage if p.status == "ok"]
        best = max((p.constant for p in ok), default=0.0)
        arg = max(ok, key=lambda p: p.constant).coords if ok else None
        history.append({"n_points": len(stage), "best_constant": best,
                        "argmax": list(arg) if arg else None})

    bad = [p for p in pts if p.status == "violated"]
    div = [p for p in pts if p.status == "divergent"]
    witnesses = []
    if bad:
        verdict = "violated_witness"
        witnesses = [{"point": list(p.coords), "lhs": p.lhs, "rhs": p.rhs} for p in bad[:5]]
    elif div:
        verdict = "divergent_term"
        witnesses = [{"point": list(p.coords), "lhs": p.lhs, "rhs": p.rhs} for p in div[:5]]
    else:
        verdict = "holds_estimated"
        if refine:
            c0, c1 = history[0]["best_constant"], history[-1]["best_constant"]
            arg = history[-1]["argmax"]
            if c1 > 1.01 * c0 and arg is not None and _boundary(arg, final_axes):
                verdict = "inconclusive_growth"
                witnesses = [{"point": arg, "constant": c1}]
    best = history[-1]["best_constant"] if verdict != "divergent_term" else math.inf
    if verdict == "violated_witness":
        best = math.inf
    return ConditionReport(
        condition_id, verdict, best,
        grid={name: ax.tolist() for name, ax in zip(axis_names, final_axes)},
        points=[p.coords for p in pts], constants=[p.constant for p in pts],
        witnesses=witnesses, notes=list(notes), history=history,
        details=details or {}, _checks=[p.check for p in pts if p.check is not None])


def _product(grids):
    if len(grids) == 1:
        return [(float(v),) for v in grids[0]]
    return [(float(a), float(b)) for a in grids[0] for b in grids[1]]


# ----------------------------------------------------------------------------
# Growth condition
# ----------------------------------------------------------------------------

def check_growth(K, triples: Sequence, tol: float = 1e-12) -> ConditionReport:
    """K(x, y) <= K(x, z) + K(z, y) on triples (y, z, x) with 0 < y < z < x."""
    tr = np.asarray(triples, dtype=float).reshape(-1, 3)
    y, z, x = tr[:, 0], tr[:, 1], tr[:, 2]
    if np.any(~((0 < y) & (y < z) & (z < x))):
        raise ValueError("triples must satisfy 0 < y < z < x")
    lhs = np.asarray(K(x, y), dtype=float)
    rhs = np.asarray(K(x, z), dtype=float) + np.asarray(K(z, y), dtype=float)
    scale = np.maximum(np.maximum(lhs, rhs), 1e-300)
    excess = (lhs - rhs) / scale
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(rhs > 0, lhs / rhs, np.where(lhs > 0, np.inf, 0.0))
    worst = int(np.argmax(excess)) if excess.size else 0
    points = [tuple(map(float, t)) for t in tr]
    if excess.size and excess[worst] > tol:
        return ConditionReport(
            "growth", "violated_witness", float(ratio[worst]), grid={"triples": len(points)},
            points=points, constants=ratio.tolist(),
            witnesses=[{"triple": list(points[worst]), "lhs": float(lhs[worst]),
                        "rhs": float(rhs[worst])}])
    checks = [lambda c: True]
    return ConditionReport("growth", "holds_estimated",
                           float(np.max(ratio)) if ratio.size else 0.0,
                           grid={"triples": len(points)}, points=points,
                           constants=ratio.tolist(), _checks=checks)


def random_triples(rng, n, lo=1e-3, hi=1e3):
    """n sorted log-uniform triples (y, z, x)."""
    t = np.sort(np.exp(rng.uniform(math.log(lo), math.log(hi), size=(n, 3))), axis=1)
    t[:, 1] = np.where(t[:, 1] <= t[:, 0], np.nextafter(t[:, 0], np.inf), t[:, 1])
    t[:, 2] = np.where(t[:, 2] <= t[:, 1], np.nextafter(t[:, 1], np.inf), t[:, 2])
    return t


# ----------------------------------------------------------------------------
# Kernel-specific two-condition systems
# ----------------------------------------------------------------------------

def _kernel_points(*objs):
    pts = []
    for o in objs:
        pts.extend(float(b) for b in getattr(o, "breakpoints", ())[1:])
        inner = getattr(o, "u", None)
        if inner is not None:
            pts.extend(float(b) for b in getattr(inner, "breakpoints", ())[1:])
            pts.extend(getattr(inner, "kinks", ()))
        pts.extend(getattr(o, "kinks", ()))
        if isinstance(o, Grid2DKernel):
            pts.extend(o.x_breakpoints[1:].tolist() + o.y_breakpoints[1:].tolist())
    return tuple(sorted(set(p for p in pts if p > 0)))


def _check_precondition_growth(K, label):
    rng = np.random.default_rng(0)
    rep = check_growth(K, random_triples(rng, 200))
    if rep.verdict == "violated_witness":
        raise ValueError(f"{label} fails the growth condition at {rep.witnesses[0]['triple']}")


def check_theorem2(setup: WeightedSetup, lam_grid=None, x_grid=None, refine=True,
                   q: QuadratureSpec = DEFAULT_QUAD, precheck=True) -> ConditionReport:
    """Two-condition system for the weighted modular inequality of a growth kernel."""
    lam_grid = default_lambda_grid() if lam_grid is None else lam_grid
    x_grid = default_x_grid() if x_grid is None else x_grid
    S = setup
    if precheck:
        if not composition_is_convex(S.Phi1, S.Phi2):
            raise ValueError("Phi1 o Phi2^{-1} is not convex")
        _check_precondition_growth(S.K, "kernel")
    Psi2 = S.Phi2.complementary()
    pts = _kernel_points(S.w, S.t_w, S.u, S.v, S.K)
    hardy = isinstance(S.K, HardyKernel)
    notes = ["beta uses the integral over [x, inf) of Phi1(lam w(y) K(y, x)) t(y) dy"]
    if hardy:
        notes.append("Hardy kernel: only the first condition is evaluated")

    @lru_cache(maxsize=None)
    def alpha_tail(x):
        return _LamIntegral(S.Phi1, lambda y: np.asarray(S.w(y)), S.t_w, x, math.inf, pts, q)

    @lru_cache(maxsize=None)
    def beta_tail(x):
        return _LamIntegral(S.Phi1, lambda y: np.asarray(S.w(y)) * np.asarray(S.K(y, x)),
                            S.t_w, x, math.inf, pts, q)

    @lru_cache(maxsize=None)
    def first_inner(x):
        h = lambda y: np.asarray(S.K(x, y)) / (np.asarray(S.u(y)) * np.asarray(S.v(y)))
        return _Inner(Psi2, h, S.v, 0.0, x, pts, q)

    @lru_cache(maxsize=None)
    def second_inner(x):
        h = lambda y: 1.0 / (np.asarray(S.u(y)) * np.asarray(S.v(y)))
        return _Inner(Psi2, h, S.v, 0.0, x, pts, q)

    def eval_alpha(lam, x):
        a = _compose(S.Phi2, S.Phi1, alpha_tail(x)(lam))
        if math.isinf(a):
            return _Point((lam, x), math.inf, "divergent", math.nan, a)
        lhs, deg = first_inner(x).lhs(a / lam)
        return _solve(lhs, a, deg, (lam, x))

    def eval_beta(lam, x):
        b = _compose(S.Phi2, S.Phi1, beta_tail(x)(lam))
        if math.isinf(b):
            return _Point((lam, x), math.inf, "divergent", math.nan, b)
        lhs, deg = second_inner(x).lhs(b / lam)
        return _solve(lhs, b, deg, (lam, x))

    subs = [_sweep("alpha_condition", eval_alpha, [lam_grid, x_grid], ["lambda", "x"], refine)]
    if not hardy:
        subs.append(_sweep("beta_condition", eval_beta, [lam_grid, x_grid], ["lambda", "x"], refine))
    return _aggregate("theorem2", subs, notes)


# ----------------------------------------------------------------------------
# Convolution-kernel conditions
# ----------------------------------------------------------------------------

class _Antiderivative:
    """t -> int_0^t f, tabulated on a dense log grid.

    Panels between nodes use one Kronrod rule; values between nodes use cubic
    Hermite interpolation with the exact derivative f. Outside the table the
    integral is computed directly.
    """

    def __init__(self, f, kinks=(), lo=1e-200, hi=1e30, ratio=1.02, q=DEFAULT_QUAD):
        self.f, self.lo, self.hi, self.q = f, lo, hi, q
        n = int(math.ceil(math.log(hi / lo) / math.log(ratio)))
        nodes = np.unique(np.concatenate([np.geomspace(lo, hi, n + 1),
                                          [k for k in kinks if lo < k < hi]]))
        a, b = nodes[:-1], nodes[1:]
        half = 0.5 * (b - a)
        x = (0.5 * (a + b))[:, None] + half[:, None] * NODES[None, :]
        vals = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
        pieces = half * (vals @ KRONROD_WEIGHTS)
        self.head = integrate_callable(f, 0.0, lo, **q.kwargs())
        self.nodes = nodes
        self.cum = self.head + np.concatenate([[0.0], np.cumsum(pieces)])
        self.deriv = np.asarray(f(nodes), dtype=float)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        out = np.zeros(flat.shape)
        inside = (flat >= self.lo) & (flat <= self.hi)
        if inside.any():
            s = flat[inside]
            i = np.clip(np.searchsorted(self.nodes, s, side="right") - 1, 0, self.nodes.size - 2)
            x0, x1 = self.nodes[i], self.nodes[i + 1]
            h = x1 - x0
            u = (s - x0) / h
            h00 = 2 * u ** 3 - 3 * u ** 2 + 1
            h10 = u ** 3 - 2 * u ** 2 + u
            h01 = -2 * u ** 3 + 3 * u ** 2
            h11 = u ** 3 - u ** 2
            out[inside] = (h00 * self.cum[i] + h10 * h * self.deriv[i]
                           + h01 * self.cum[i + 1] + h11 * h * self.deriv[i + 1])
        for j in np.flatnonzero(~inside):
            v = flat[j]
            if v <= 0:
                continue
            if v < self.lo:
                out[j] = integrate_callable(self.f, 0.0, v, **self.q.kwargs())
            else:
                out[j] = self.cum[-1] + integrate_callable(self.f, self.hi, v, **self.q.kwargs())
        return out.reshape(t.shape)


def _hardy_pair(k_star):
    """Vectorized (I k*, I2 k*) for a step or analytic nonincreasing k*."""
    if isinstance(k_star, StepFunction):
        if not k_star.is_nonincreasing():
            raise ValueError("k_star must be nonincreasing")
        I = lambda t: np.asarray(k_star.cumulative(np.asarray(t, dtype=float)), dtype=float)
        I2 = step_I2(k_star)
        return I, I2
    if getattr(k_star, "monotone", None) != "decreasing":
        raise ValueError("k_star must be flagged decreasing")
    kinks = getattr(k_star, "kinks", ())
    if k_star.primitive is not None:
        I = lambda t: np.asarray(k_star.primitive(np.asarray(t, dtype=float)), dtype=float)
    else:
        I = _Antiderivative(lambda t: np.asarray(k_star(t), dtype=float), kinks)
    return I, _Antiderivative(I, kinks)


def _is_zero_profile(k_star):
    if isinstance(k_star, StepFunction):
        return k_star.is_zero()
    probe = np.logspace(-8, 8, 65)
    return bool(np.all(np.asarray(k_star(probe)) == 0))


def _zero_report(condition_id, families):
    subs = [ConditionReport(f, "holds_estimated", 0.0, notes=["zero kernel: left sides vanish"],
                            _checks=[lambda c: True]) for f in families]
    return _aggregate(condition_id, subs, ["zero kernel: every condition holds with any c"])


def check_theorem4_orlicz(k_star, Phi1: NFunction, Phi2: NFunction, lam_grid=None, x_grid=None,
                          refine=True, only=None, q: QuadratureSpec = DEFAULT_QUAD) -> ConditionReport:
    """Families (v)-(viii) for convolution with rearranged kernel k*."""
    families = ("v", "vi", "vii", "viii")
    chosen = families if only is None else tuple(only)
    if _is_zero_profile(k_star):
        return _zero_report("theorem4", chosen)
    lam_grid = default_lambda_grid() if lam_grid is None else lam_grid
    x_grid = default_x_grid() if x_grid is None else x_grid
    I, I2 = _hardy_pair(k_star)
    Psi1, Psi2 = Phi1.complementary(), Phi2.complementary()
    pts = _kernel_points(k_star)
    one = lambda y: np.ones_like(np.asarray(y, dtype=float))
    inv_y = lambda y: 1.0 / np.asarray(y, dtype=float)
    axes, names = [lam_grid, x_grid], ["lambda", "x"]

    @lru_cache(maxsize=None)
    def tails(x):
        Ix = float(I(x))
        gap = lambda y: np.maximum(np.asarray(I(y)) - Ix, 0.0) / np.asarray(y)
        return (_LamIntegral(Phi1, inv_y, one, x, math.inf, pts, q),
                _LamIntegral(Phi1, gap, one, x, math.inf, pts, q),
                _LamIntegral(Psi2, inv_y, one, x, math.inf, pts, q),
                _LamIntegral(Psi2, gap, one, x, math.inf, pts, q))

    def kern(x):
        Ix = float(I(x))
        return lambda y: np.maximum(Ix - np.asarray(I(y)), 0.0)

    def alpha1(lam, x):
        return _compose(Phi2, Phi1, tails(x)[0](lam))

    def alpha2(lam, x):
        return _compose(Psi1, Psi2, tails(x)[2](lam))

    def integral_condition(N, outer, h_of_x):
        inner = lru_cache(maxsize=None)(lambda x: _Inner(N, h_of_x(x), one, 0.0, x, pts, q))

        def ev(lam, x):
            a = outer(lam, x)
            if math.isinf(a):
                return _Point((lam, x), math.inf, "divergent", math.nan, a)
            lhs, deg = inner(x).lhs(a / lam)
            return _solve(lhs, a, deg, (lam, x))
        return ev

    def pointwise_condition(N, beta_fn, multiplier_of_x):
        def ev(lam, x):
            b = beta_fn(lam, x)
            if math.isinf(b):
                return _Point((lam, x), math.inf, "divergent", math.nan, b)
            lhs, deg = _pointwise_lhs(N, b / lam, multiplier_of_x(x))
            return _solve(lhs, b, deg, (lam, x))
        return ev

    beta1 = lambda lam, x: _compose(Phi2, Phi1, tails(x)[1](lam))
    beta2 = lambda lam, x: _compose(Psi1, Psi2, tails(x)[3](lam))
    y_over_I2 = lambda x: (lambda y: np.asarray(y) / np.asarray(I2(y)))
    y_over_I = lambda x: (lambda y: np.asarray(y) / np.asarray(I(y)))

    subs = []
    if "v" in chosen:
        subs.append(_aggregate("v", [
            _sweep("v_1", integral_condition(Psi2, alpha1, kern), axes, names, refine),
            _sweep("v_2", pointwise_condition(Psi2, beta1, lambda x: 1.0), axes, names, refine)]))
    if "vi" in chosen:
        subs.append(_aggregate("vi", [
            _sweep("vi_1", integral_condition(Phi1, alpha2, kern), axes, names, refine),
            _sweep("vi_2", pointwise_condition(Phi1, beta2, lambda x: x), axes, names, refine)]))
    if "vii" in chosen:
        subs.append(_sweep("vii", integral_condition(Psi2, alpha1, y_over_I2), axes, names, refine))
    if "viii" in chosen:
        subs.append(_sweep("viii", integral_condition(Phi1, alpha2, y_over_I), axes, names, refine))
    notes = ["(v) first condition uses alpha_1 inside the integrand"]
    return _aggregate("theorem4", subs, notes)


def check_power_conditions(k_star, params: PowerParams, x_grid=None, refine=True, only=None,
                           q: QuadratureSpec = DEFAULT_QUAD) -> ConditionReport:
    """Power-case inequalities, each as sup over x of lhs(x) / rhs(x)."""
    families = ("v_prime", "vi_prime", "vii_prime", "viii_prime")
    chosen = families if only is None else tuple(only)
    notes = []
    if params.r is None:
        skipped = [f for f in chosen if f in ("vi_prime", "viii_prime")]
        if skipped:
            notes.append(f"skipped without r: {', '.join(skipped)}")
        chosen = tuple(f for f in chosen if f not in ("vi_prime", "viii_prime"))
    if _is_zero_profile(k_star):
        rep = _zero_report("power_conditions", chosen)
        rep.notes.extend(notes)
        return rep
    x_grid = default_x_grid() if x_grid is None else x_grid
    I, I2 = _hardy_pair(k_star)
    p, qq, pp, qp = params.p, params.q, params.p_prime, params.q_prime
    r, rp = params.r, params.r_prime
    pts = _kernel_points(k_star)

    def ratio(lhs_fn, rhs_fn):
        def ev(x):
            lhs = lhs_fn(x)
            rhs = rhs_fn(x)
            if math.isinf(lhs) or math.isnan(lhs):
                return _Point((x,), math.inf, "divergent", lhs, rhs)
            if lhs == 0:
                return _Point((x,), 0.0, "ok", 0.0, rhs, lambda c: True)
            if rhs <= 0:
                return _Point((x,), math.inf, "violated", lhs, rhs)
            C = lhs / rhs
            return _Point((x,), C, "ok", lhs, rhs, lambda c, C=C: c * C <= 1 + 1e-9)
        return ev

    def head(expo):
        def f(x):
            Ix = float(I(x))
            return _integral(_safe(lambda y: np.maximum(Ix - np.asarray(I(y)), 0.0) ** expo),
                             0.0, x, pts, q)
        return f

    def tail(expo, outer):
        def f(x):
            Ix = float(I(x))
            val = _integral(_safe(lambda y: (np.maximum(np.asarray(I(y)) - Ix, 0.0) / np.asarray(y)) ** expo),
                            x, math.inf, pts, q)
            return val ** outer
        return f

    def quotient(fn, expo):
        return lambda x: _integral(_safe(lambda y: (np.asarray(y) / np.asarray(fn(y))) ** expo),
                                   0.0, x, pts, q)

    subs = []
    sweep = lambda cid, ev: _sweep(cid, ev, [x_grid], ["x"], refine)
    if "v_prime" in chosen:
        subs.append(_aggregate("v_prime", [
            sweep("v_prime_1", ratio(head(pp), lambda x: x ** (pp / qp))),
            sweep("v_prime_2", ratio(tail(qq, pp / qp), lambda x: 1.0 / x))]))
    if "vi_prime" in chosen:
        subs.append(_aggregate("vi_prime", [
            sweep("vi_prime_1", ratio(head(qq), lambda x: x ** (qp / r))),
            sweep("vi_prime_2", ratio(tail(pp, qq / rp), lambda x: 1.0 / x))]))
    if "vii_prime" in chosen:
        subs.append(sweep("vii_prime", ratio(quotient(I2, pp), lambda x: x ** (p / qp))))
    if "viii_prime" in chosen:
        subs.append(sweep("viii_prime", ratio(quotient(I, qq), lambda x: x ** (qq / r))))
    return _aggregate("power_conditions", subs, notes)


# ----------------------------------------------------------------------------
# Averaging operator conditions
# ----------------------------------------------------------------------------

def check_theorem7(Phi: NFunction, u: Weight, lam_grid=None, x_grid=None, refine=True,
                   variant: str = "derived", q: QuadratureSpec = DEFAULT_QUAD) -> ConditionReport:
    """Two conditions for boundedness of f* -> f** in the gauge norm of (Phi, u).

    ``variant="derived"`` (default) uses
    alpha = int_x^inf Psi(lam / U) u and int_0^x Psi(c beta / lam) u <= beta;
    ``variant="printed"`` uses alpha = int_0^inf Psi(lam u / u) and puts U(y)
    in the second denominator.
    """
    if u.total_mass != "infinite":
        raise ValueError("weight must have infinite total mass (integral of u over R+ = inf)")
    if variant not in ("derived", "printed"):
        raise ValueError("variant must be 'derived' or 'printed'")
    lam_grid = default_lambda_grid() if lam_grid is None else lam_grid
    x_grid = default_x_grid() if x_grid is None else x_grid
    Psi = Phi.complementary()
    pts = _kernel_points(u)
    one = lambda y: np.ones_like(np.asarray(y, dtype=float))
    U = lambda y: np.asarray(u.U(np.asarray(y, dtype=float)), dtype=float)

    @lru_cache(maxsize=None)
    def alpha_tail(x):
        if variant == "printed":
            return _LamIntegral(Psi, lambda y: np.asarray(u(y)) / np.asarray(u(y)), one, 0.0,
                                math.inf, pts, q)
        return _LamIntegral(Psi, lambda y: 1.0 / U(y), u, x, math.inf, pts, q)

    @lru_cache(maxsize=None)
    def beta_tail(x):
        return _LamIntegral(Phi, lambda y: 1.0 / np.asarray(y), u, x, math.inf, pts, q)

    @lru_cache(maxsize=None)
    def inners(x):
        h = (lambda y: 1.0 / U(y)) if variant == "printed" else one
        return _Inner(Phi, one, u, 0.0, x, pts, q), _Inner(Psi, h, u, 0.0, x, pts, q)

    def eval_alpha(lam, x):
        a = alpha_tail(x)(lam)
        if math.isinf(a):
            return _Point((lam, x), math.inf, "divergent", math.nan, a)
        lhs, deg = inners(x)[0].lhs(a / lam)
        return _solve(lhs, a, deg, (lam, x))

    def eval_beta(lam, x):
        b = beta_tail(x)(lam)
        if math.isinf(b):
            return _Point((lam, x), math.inf, "divergent", math.nan, b)
        lhs, deg = inners(x)[1].lhs(b / lam)
        return _solve(lhs, b, deg, (lam, x))

    axes, names = [lam_grid, x_grid], ["lambda", "x"]
    subs = [_sweep("alpha_condition", eval_alpha, axes, names, refine),
            _sweep("beta_condition", eval_beta, axes, names, refine)]
    return _aggregate("theorem7", subs, [f"variant: {variant}"])


# ----------------------------------------------------------------------------
# Iterated-rearrangement conditions
# ----------------------------------------------------------------------------

def _is_zero_kernel(L):
    if isinstance(L, Grid2DKernel):
        return not np.any(L.values > 0)
    probe = np.logspace(-6, 6, 25)
    return bool(np.all(np.asarray(L(probe[:, None], probe[None, :])) == 0))


def _growth_triples():
    return random_triples(np.random.default_rng(0), 200)


def check_theorem10(L, Phi1: NFunction, Phi2: NFunction, u1: Weight, u2: Weight,
                    lam_grid=None, x_grid=None, refine=True, precheck=True,
                    q: QuadratureSpec = DEFAULT_QUAD) -> ConditionReport:
    """Four conditions on M1 / M2 built from a doubly nonincreasing L.

    Inside alpha_1 and beta_1 the weight u_2 appears through its cumulative U_2.
    """
    ids = ("h1_alpha", "h1_beta", "h2_alpha", "h2_beta")
    if _is_zero_kernel(L):
        return _zero_report("theorem10", ids)
    lam_grid = default_lambda_grid() if lam_grid is None else lam_grid
    x_grid = default_x_grid() if x_grid is None else x_grid
    hk = build_hardy_kernels(L, q)
    if precheck:
        if not composition_is_convex(Phi1, Phi2):
            raise ValueError("Phi1 o Phi2^{-1} is not convex")
        for name, M in (("M1", hk.M1), ("M2", hk.M2)):
            if check_growth(M, _growth_triples()).verdict == "violated_witness":
                raise ValueError(f"{name} fails the growth condition")
    Psi1, Psi2 = Phi1.complementary(), Phi2.complementary()
    pts = _kernel_points(u1, u2, L)
    ipts = tuple(1.0 / p for p in pts)
    U2 = lambda y: np.asarray(u2.U(np.asarray(y, dtype=float)), dtype=float)
    one = lambda y: np.ones_like(np.asarray(y, dtype=float))
    inv_w1 = lambda x: np.asarray(x, dtype=float) ** -2.0 * np.asarray(u1(1.0 / np.asarray(x, dtype=float)))
    inv_w2 = lambda x: np.asarray(x, dtype=float) ** -2.0 * np.asarray(u2(1.0 / np.asarray(x, dtype=float)))

    @lru_cache(maxsize=None)
    def tails(x):
        return (_LamIntegral(Psi2, lambda y: 1.0 / U2(y), u2, x, math.inf, pts, q),
                _LamIntegral(Psi2, lambda y: np.asarray(hk.M1(x, y)) / U2(y), u2, x, math.inf, pts, q),
                _LamIntegral(Phi1, one, inv_w1, x, math.inf, ipts, q),
                _LamIntegral(Phi1, lambda s: np.asarray(hk.M2(s, x)), inv_w1, x, math.inf, ipts, q))

    def cond(idx, N, outer_pair, h_of_x, m, points):
        inner = lru_cache(maxsize=None)(lambda x: _Inner(N, h_of_x(x), m, 0.0, x, points, q))

        def ev(lam, x):
            outer_fn, inner_inv = outer_pair
            a = _compose(outer_fn, inner_inv, tails(x)[idx](lam))
            if math.isinf(a):
                return _Point((lam, x), math.inf, "divergent", math.nan, a)
            lhs, deg = inner(x).lhs(a / lam)
            return _solve(lhs, a, deg, (lam, x))
        return ev

    inv_u1 = lambda x: (lambda y: np.asarray(hk.M1(x, y)) / np.asarray(u1(y)))
    inv_u1_flat = lambda x: (lambda y: 1.0 / np.asarray(u1(y)))
    m2_over = lambda y: (lambda x: np.asarray(hk.M2(y, x)) / np.asarray(u2(1.0 / np.asarray(x))))
    flat_over = lambda y: (lambda x: 1.0 / np.asarray(u2(1.0 / np.asarray(x))))

    axes, names = [lam_grid, x_grid], ["lambda", "x"]
    subs = [
        _sweep("h1_alpha", cond(0, Phi1, (Psi1, Psi2), inv_u1, u1, pts), axes, names, refine),
        _sweep("h1_beta", cond(1, Phi1, (Psi1, Psi2), inv_u1_flat, u1, pts), axes, names, refine),
        _sweep("h2_alpha", cond(2, Psi2, (Phi2, Phi1), m2_over, inv_w2, ipts), axes, ["lambda", "y"], refine),
        _sweep("h2_beta", cond(3, Psi2, (Phi2, Phi1), flat_over, inv_w2, ipts), axes, ["lambda", "y"], refine),
    ]
    notes = ["u_2 inside alpha_1 and beta_1 read as its cumulative U_2",
             "third and fourth conditions carry 1/lam like the first two"]
    return _aggregate("theorem10", subs, notes)


def check_theorem12(K, params: PowerParams, u1: Weight, u2: Weight, x_grid=None,
                    refine=True, q: QuadratureSpec = DEFAULT_QUAD) -> ConditionReport:
    """Lambda-free power-case conditions; the constant is sup of lhs / rhs."""
    ids = ("h1_alpha", "h1_beta", "h2_alpha", "h2_beta")
    if _is_zero_kernel(K):
        return _zero_report("theorem12", ids)
    x_grid = default_x_grid() if x_grid is None else x_grid
    L = K if isinstance(K, Grid2DKernel) or K.is_nonincreasing() else None
    if L is None:
        raise ValueError("kernel must be nonincreasing in both variables")
    hk = build_hardy_kernels(L, q)
    p, qq, pp, qp = params.p, params.q, params.p_prime, params.q_prime
    pts = _kernel_points(u1, u2, K)
    ipts = tuple(1.0 / v for v in pts)
    U2 = lambda y: np.asarray(u2.U(np.asarray(y, dtype=float)), dtype=float)
    arr = lambda v: np.asarray(v, dtype=float)

    def alpha1(x):
        return _integral(_safe(lambda y: U2(y) ** -pp * arr(u2(y))), x, math.inf, pts, q) ** (qp / pp)

    def beta1(x):
        return _integral(_safe(lambda y: (arr(hk.M1(x, y)) / U2(y)) ** pp * arr(u2(y))),
                         x, math.inf, pts, q) ** (qp / pp)

    def alpha2(y):
        return _integral(_safe(lambda x: arr(x) ** -2.0 * arr(u1(1.0 / arr(x)))),
                         y, math.inf, ipts, q) ** (p / qq)

    def beta2(y):
        return _integral(_safe(lambda x: arr(hk.M2(x, y)) ** qq * arr(x) ** -2.0 * arr(u1(1.0 / arr(x)))),
                         y, math.inf, ipts, q) ** (p / qq)

    def power_rhs(fn, expo):
        def r(x):
            v = fn(x)
            if math.isinf(v) or math.isnan(v):
                return math.nan
            if v == 0:
                return math.inf if expo < 0 else 0.0
            return v ** expo
        return r

    def lhs_h1a(x):
        return _integral(_safe(lambda y: arr(hk.M1(x, y)) ** qq * arr(u1(y)) ** (1 - qq)), 0.0, x, pts, q)

    def lhs_h1b(x):
        return _integral(_safe(lambda y: arr(u1(y)) ** (1 - qq)), 0.0, x, pts, q)

    def lhs_h2a(y):
        return _integral(_safe(lambda x: arr(hk.M2(y, x)) ** pp * arr(x) ** -2.0
                               * arr(u2(1.0 / arr(x))) ** (1 - pp)), 0.0, y, ipts, q)

    def lhs_h2b(y):
        return _integral(_safe(lambda x: arr(x) ** -2.0 * arr(u2(1.0 / arr(x))) ** (1 - pp)),
                         0.0, y, ipts, q)

    def ratio(lhs_fn, rhs_fn):
        def ev(x):
            rhs = rhs_fn(x)
            if math.isnan(rhs):
                return _Point((x,), math.inf, "divergent", math.nan, rhs)
            lhs = lhs_fn(x)
            if math.isinf(lhs) or math.isnan(lhs):
                return _Point((x,), math.inf, "divergent", lhs, rhs)
            if lhs == 0:
                return _Point((x,), 0.0, "ok", 0.0, rhs, lambda c: True)
            if rhs <= 0:
                return _Point((x,), math.inf, "violated", lhs, rhs)
            if math.isinf(rhs):
                return _Point((x,), 0.0, "ok", lhs, rhs, lambda c: True)
            C = lhs / rhs
            return _Point((x,), C, "ok", lhs, rhs, lambda c, C=C: c * C <= 1 + 1e-9)
        return ev

    subs = [
        _sweep("h1_alpha", ratio(lhs_h1a, power_rhs(alpha1, 1 - qq)), [x_grid], ["x"], refine),
        _sweep("h1_beta", ratio(lhs_h1b, power_rhs(beta1, 1 - qq)), [x_grid], ["x"], refine),
        _sweep("h2_alpha", ratio(lhs_h2a, power_rhs(alpha2, 1 - pp)), [x_grid], ["y"], refine),
        _sweep("h2_beta", ratio(lhs_h2b, power_rhs(beta2, 1 - pp)), [x_grid], ["y"], refine),
    ]
    return _aggregate("theorem12", subs, ["U_2 is the cumulative of u_2"])


# ----------------------------------------------------------------------------
# Mixed-norm probe
# ----------------------------------------------------------------------------

def _inner_norm_power(K, x, expo, q):
    """int_0^inf K(x, y)^expo dy (exact for grid kernels)."""
    if isinstance(K, Grid2DKernel):
        ix = np.searchsorted(K.x_breakpoints, x, side="right") - 1
        if ix < 0 or ix >= K.values.shape[0]:
            return 0.0
        return math.fsum(K.values[ix] ** expo * K.y_widths)
    g = _safe(lambda y: np.asarray(K(x, y), dtype=float) ** expo)
    return integrate_tail_callable(g, 0.0, points=(x, 1.0), **q.kwargs())


def kantorovich_probe(K, params: PowerParams, eps_sequence=None, x_grid=None,
                      q: QuadratureSpec = DEFAULT_QUAD) -> ConditionReport:
    """Partial mixed norms int_eps^1 N(x)^q dx with N(x) = ||K(x, .)||_{p'}."""
    eps = np.asarray([2.0 ** -k for k in range(3, 11)] if eps_sequence is None else eps_sequence,
                     dtype=float)
    if eps.size < 3 or np.any(np.diff(eps) >= 0) or np.any(eps <= 0):
        raise ValueError("eps_sequence must be positive, strictly decreasing, length >= 3")
    x_grid = np.logspace(-3, 3, 25) if x_grid is None else np.asarray(x_grid, dtype=float)
    pp, qq = params.p_prime, params.q

    @lru_cache(maxsize=None)
    def N(x):
        return _inner_norm_power(K, x, pp, q) ** (1.0 / pp)

    inner = [N(float(x)) for x in x_grid]
    if any(math.isinf(v) for v in inner):
        bad = x_grid[[math.isinf(v) for v in inner].index(True)]
        return ConditionReport("kantorovich", "divergent_term", math.inf,
                               grid={"x": x_grid.tolist()},
                               witnesses=[{"stage": "inner", "x": float(bad)}],
                               notes=["inner integral diverges"])
    inner = np.array(inner)
    pos = inner > 0
    slope = float(np.polyfit(np.log(x_grid[pos]), np.log(inner[pos]), 1)[0]) if pos.sum() > 1 else math.nan

    Nq = lambda xs: np.array([N(float(v)) for v in np.atleast_1d(xs)]) ** qq
    edges = np.concatenate([[1.0], eps])
    shells = [_integral(Nq, float(b), float(a), (), q) for a, b in zip(edges[:-1], edges[1:])]
    partial = np.cumsum(shells)
    growth = (partial[1:] / np.where(partial[:-1] > 0, partial[:-1], np.nan)).tolist()
    inc = np.asarray(shells[1:])
    with np.errstate(divide="ignore", invalid="ignore"):
        inc_ratio = (inc[1:] / inc[:-1]) / (np.log(eps[2:] / eps[1:-1]) / np.log(eps[1:-1] / eps[:-2]))
    tail = _integral(Nq, 1.0, math.inf, (), q)
    details = {"inner_norms": inner.tolist(), "slope": slope, "eps": eps.tolist(),
               "partial_integrals": partial.tolist(), "growth_ratios": growth,
               "increment_ratios": [float(v) for v in inc_ratio], "tail_integral": tail}
    diverging = (np.all(np.isfinite(inc_ratio[-3:])) and np.all(inc_ratio[-3:] >= 0.999)
                 and partial[-1] > 0) or math.isinf(tail)
    if diverging:
        return ConditionReport("kantorovich", "divergent_term", math.inf,
                               grid={"x": x_grid.tolist(), "eps": eps.tolist()},
                               witnesses=[{"stage": "outer", "eps": float(eps[-1]),
                                           "partial": float(partial[-1])}],
                               notes=["partial outer integrals grow without bound"],
                               details=details)
    # geometric extrapolation of the increments for the part below the last eps
    r = float(inc[-1] / inc[-2]) if inc.size > 1 and inc[-2] > 0 else 0.0
    remainder = float(inc[-1]) * r / (1 - r) if 0 < r < 1 else 0.0
    total = (float(partial[-1]) + remainder + tail) ** (1.0 / qq)
    details["remainder_estimate"] = remainder
    details["mixed_norm_estimate"] = total
    return ConditionReport("kantorovich", "holds_estimated", total,
                           grid={"x": x_grid.tolist(), "eps": eps.tolist()},
                           details=details, _checks=[lambda c: True])
