"""Nonnegative functions on the half line and the quadrature engine behind them.

Three one-variable representations live here:

* :class:`StepFunction` -- finitely many constant slabs, exact arithmetic;
* :class:`PiecewiseLinear` -- continuous, compactly supported, also exact
  (the shape of a convolution of two step functions);
* :class:`AnalyticFunction` -- an arbitrary vectorized evaluator, integrated
  adaptively.

Two-variable kernels are :class:`Grid2DKernel` (cellwise constant) and
:class:`AnalyticKernel`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ._quadrature import (QuadratureError, adaptive, integrate_callable,
                          integrate_tail_callable)

__all__ = [
    "AnalyticFunction", "AnalyticKernel", "AveragingKernel", "Grid2DKernel",
    "HardyKernel", "PiecewiseLinear", "QuadratureError", "QuadratureSpec",
    "StepFunction", "TailHint", "discretize", "discretize_kernel", "integrate",
    "integrate_callable", "integrate_tail", "integrate_tail_callable",
    "quadrature_error_estimate",
]

MONOTONE_FLAGS = (None, "decreasing", "increasing")


def _readonly(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


def _check_breakpoints(bp, name="breakpoints"):
    if bp.ndim != 1 or bp.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D sequence")
    if bp[0] != 0.0:
        raise ValueError(f"{name} must start at 0, got {bp[0]}")
    if not np.all(np.isfinite(bp)):
        raise ValueError(f"{name} must be finite")
    if np.any(np.diff(bp) <= 0):
        raise ValueError(f"{name} must be strictly increasing")


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for adaptive quadrature.

    Semi-infinite integrals without a tail hint go through the fixed map
    ``s -> a + s/(1-s)`` on [0, 1).
    """

    abs_tol: float = 1e-13
    rel_tol: float = 1e-11
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("abs_tol and rel_tol must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be at least 1")

    def kwargs(self):
        return dict(abs_tol=self.abs_tol, rel_tol=self.rel_tol, limit=self.max_subdivisions)


DEFAULT_QUAD = QuadratureSpec()


# ----------------------------------------------------------------------------
# Step functions
# ----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StepFunction:
    """Value ``values[i]`` on ``[breakpoints[i], breakpoints[i+1])``, zero after."""

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        bp = _readonly(self.breakpoints)
        vals = _readonly(self.values)
        _check_breakpoints(bp)
        if vals.ndim != 1 or vals.size != bp.size - 1:
            raise ValueError(
                f"need one value per slab: {bp.size - 1} slabs, {vals.size} values")
        if not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise ValueError("values must be finite and nonnegative")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @classmethod
    def zero(cls):
        return cls([0.0], [])

    @classmethod
    def indicator(cls, a, b, height=1.0):
        """``height`` on [a, b)."""
        if not 0 <= a < b:
            raise ValueError("need 0 <= a < b")
        if a == 0:
            return cls([0.0, b], [height])
        return cls([0.0, a, b], [0.0, height])

    @classmethod
    def from_slabs(cls, lengths, values):
        lengths = np.asarray(lengths, dtype=float)
        if np.any(lengths <= 0):
            raise ValueError("slab lengths must be positive")
        return cls(np.concatenate([[0.0], np.cumsum(lengths)]), values)

    @property
    def lengths(self):
        return np.diff(self.breakpoints)

    @property
    def support_end(self):
        nz = np.nonzero(self.values)[0]
        return float(self.breakpoints[nz[-1] + 1]) if nz.size else 0.0

    @property
    def masses(self):
        return self.values * self.lengths

    def is_zero(self):
        return not np.any(self.values > 0)

    def is_nonincreasing(self):
        return bool(np.all(np.diff(self.values) <= 0))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.breakpoints, t, side="right") - 1
        ok = (idx >= 0) & (idx < self.values.size) & (t >= 0)
        out = np.zeros(t.shape)
        out[ok] = self.values[idx[ok]]
        return out if out.ndim else float(out)

    def integral(self, a=0.0, b=math.inf):
        """Exact slab sum of the integral over [a, b] (compensated)."""
        if a > b:
            raise ValueError(f"lower limit {a} exceeds upper limit {b}")
        lo = np.maximum(self.breakpoints[:-1], a)
        hi = np.minimum(self.breakpoints[1:], b)
        overlap = np.clip(hi - lo, 0.0, None)
        return math.fsum(self.values * overlap)

    def cumulative(self, t):
        """``t -> integral over [0, t]``, vectorized."""
        t = np.asarray(t, dtype=float)
        cum = np.concatenate([[0.0], np.cumsum(self.masses)])
        tc = np.clip(t, 0.0, self.breakpoints[-1])
        idx = np.clip(np.searchsorted(self.breakpoints, tc, side="right") - 1,
                      0, max(self.values.size - 1, 0))
        if self.values.size == 0:
            out = np.zeros(t.shape)
        else:
            out = cum[idx] + self.values[idx] * (tc - self.breakpoints[idx])
        return out if out.ndim else float(out)

    def scaled(self, c):
        return StepFunction(self.breakpoints, c * self.values)

    def refine(self, points):
        """Same function on a breakpoint set containing ``points``."""
        pts = np.asarray(points, dtype=float)
        bp = np.union1d(self.breakpoints, pts[pts >= 0])
        return StepFunction(bp, self(bp[:-1]))

    def to_json(self):
        return {"breakpoints": self.breakpoints.tolist(), "values": self.values.tolist()}

    @classmethod
    def from_json(cls, data):
        if isinstance(data, str):
            data = json.loads(data)
        return cls(data["breakpoints"], data["values"])

    def __repr__(self):
        return f"StepFunction({self.values.size} slabs, support_end={self.support_end:g})"


# ----------------------------------------------------------------------------
# Continuous piecewise-linear functions
# ----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PiecewiseLinear:
    """Linear interpolation of (knots, values) on [0, knots[-1]], zero beyond."""

    knots: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        kn = _readonly(self.knots)
        vals = _readonly(self.values)
        _check_breakpoints(kn, "knots")
        if vals.shape != kn.shape:
            raise ValueError("one value per knot required")
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise ValueError("values must be finite and nonnegative")
        object.__setattr__(self, "knots", kn)
        object.__setattr__(self, "values", vals)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.interp(t, self.knots, self.values, left=0.0, right=0.0)
        return out if out.ndim else float(out)

    def _segments(self):
        return (self.knots[:-1], self.knots[1:], self.values[:-1], self.values[1:])

    def integral(self, a=0.0, b=math.inf):
        x0, x1, y0, y1 = self._segments()
        lo = np.clip(np.maximum(x0, a), x0, x1)
        hi = np.clip(np.minimum(x1, b), x0, x1)
        keep = hi > lo
        if not keep.any():
            return 0.0
        lo, hi = lo[keep], hi[keep]
        slope = (y1[keep] - y0[keep]) / (x1[keep] - x0[keep])
        f_lo = y0[keep] + slope * (lo - x0[keep])
        f_hi = y0[keep] + slope * (hi - x0[keep])
        return math.fsum(0.5 * (f_lo + f_hi) * (hi - lo))

    def distribution(self, lam):
        """Measure of {h > lam}; exact on every linear piece."""
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        x0, x1, y0, y1 = self._segments()
        width = (x1 - x0)[None, :]
        lo = np.minimum(y0, y1)[None, :]
        hi = np.maximum(y0, y1)[None, :]
        L = lam[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = np.where(hi > lo, (hi - L) / (hi - lo), 0.0)
        frac = np.where(L < lo, 1.0, np.where(L >= hi, 0.0, frac))
        return np.array([math.fsum(r) for r in frac * width])

    def _levels(self):
        return np.unique(np.concatenate([self.values, [0.0]]))[::-1]

    def star(self, t):
        """Decreasing rearrangement evaluated at ``t``."""
        t = float(t)
        levels = self._levels()
        mu_gt = self.distribution(levels)                       # |{h > v}|
        mu_ge = self.distribution(np.nextafter(levels, -np.inf))  # |{h >= v}|, up to flats
        for j, v in enumerate(levels):
            if mu_gt[j] > t:
                upper = levels[j - 1]
                if mu_ge[j - 1] > t:
                    return float(upper)
                # mu is linear in lambda on (v, upper)
                span = mu_gt[j] - mu_ge[j - 1]
                return float(v + (upper - v) * (mu_gt[j] - t) / span)
        return 0.0

    def star_integral(self, t):
        """Integral of the rearrangement over [0, t] = lam t + int (h - lam)_+."""
        t = float(t)
        if t <= 0:
            return 0.0
        lam = self.star(t)
        x0, x1, y0, y1 = self._segments()
        total = []
        for a, b, ya, yb in zip(x0, x1, y0, y1):
            da, db = ya - lam, yb - lam
            if da <= 0 and db <= 0:
                continue
            if da >= 0 and db >= 0:
                total.append(0.5 * (da + db) * (b - a))
            else:
                pos = max(da, db)
                frac = pos / (abs(da) + abs(db))
                total.append(0.5 * pos * frac * (b - a))
        return lam * t + math.fsum(total)

    def to_step(self, resolution):
        """Cell averages on ``resolution`` uniform cells of the support."""
        if resolution is None or int(resolution) < 1:
            raise ValueError("resolution must be a positive integer")
        end = self.knots[-1]
        grid = np.linspace(0.0, end, int(resolution) + 1)
        vals = [self.integral(a, b) / (b - a) for a, b in zip(grid[:-1], grid[1:])]
        return StepFunction(grid, np.clip(vals, 0.0, None))


# ----------------------------------------------------------------------------
# Analytic functions
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class TailHint:
    """Asymptotic decay of a function: ``power`` t^value or ``exp`` e^(-value t)."""

    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in ("power", "exp"):
            raise ValueError("tail hint kind must be 'power' or 'exp'")
        if self.kind == "exp" and self.value <= 0:
            raise ValueError("exponential decay rate must be positive")


def _vectorized(fn):
    def call(t):
        t = np.asarray(t, dtype=float)
        try:
            out = np.asarray(fn(t), dtype=float)
            if out.shape == t.shape:
                return out
            if out.shape == ():
                return np.full(t.shape, float(out))
        except (TypeError, ValueError):
            pass
        return np.vectorize(lambda s: float(fn(s)), otypes=[float])(t)
    return call


@dataclass(frozen=True, eq=False)
class AnalyticFunction:
    """A nonnegative function given by an evaluator.

    ``primitive`` (t -> integral over [0, t]) and ``kinks`` (points where the
    function is not smooth) are optional accelerators for quadrature.
    """

    evaluator: Callable
    domain_end: float = math.inf
    tail_hint: Optional[TailHint] = None
    monotone: Optional[str] = None
    primitive: Optional[Callable] = None
    kinks: tuple = ()
    name: str = ""

    def __post_init__(self):
        if self.monotone not in MONOTONE_FLAGS:
            raise ValueError(f"monotone flag must be one of {MONOTONE_FLAGS}")
        if not self.domain_end > 0:
            raise ValueError("domain_end must be positive")
        object.__setattr__(self, "kinks", tuple(float(k) for k in self.kinks))
        if self.monotone is not None:
            self.check_monotone()

    @classmethod
    def constant(cls, c):
        c = float(c)
        return cls(lambda t: np.full(np.shape(t), c), monotone="decreasing",
                   primitive=lambda t: c * np.asarray(t, dtype=float), name=f"const({c:g})")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        inside = (t >= 0) & (t < self.domain_end)
        if inside.any():
            out[inside] = _vectorized(self.evaluator)(t[inside])
        return out if out.ndim else float(out)

    def check_monotone(self, grid=None):
        if grid is None:
            grid = np.logspace(-6, 6, 97)
            grid = grid[grid < self.domain_end]
        vals = self(grid)
        if np.any(~np.isfinite(vals)) or np.any(vals < 0):
            raise ValueError(f"{self.name or 'function'} is not finite and nonnegative on the probe grid")
        d = np.diff(vals)
        slack = 1e-12 * np.maximum(np.abs(vals[1:]), 1.0)
        if self.monotone == "decreasing" and np.any(d > slack):
            raise ValueError(f"{self.name or 'function'} flagged decreasing but increases")
        if self.monotone == "increasing" and np.any(d < -slack):
            raise ValueError(f"{self.name or 'function'} flagged increasing but decreases")

    def cumulative(self, t, quad=DEFAULT_QUAD):
        """Vectorized ``t -> integral over [0, t]``."""
        t = np.asarray(t, dtype=float)
        if self.primitive is not None:
            tc = np.minimum(t, self.domain_end)
            return np.asarray(self.primitive(tc), dtype=float) if t.ndim else float(self.primitive(tc))
        return cumulative_integral(self, t, quad)


# ----------------------------------------------------------------------------
# Kernels
# ----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Grid2DKernel:
    """``values[i, j]`` on [x_i, x_{i+1}) x [y_j, y_{j+1}); zero outside."""

    x_breakpoints: np.ndarray
    y_breakpoints: np.ndarray
    values: np.ndarray
    monotone_x: Optional[str] = None
    monotone_y: Optional[str] = None

    def __post_init__(self):
        xb = _readonly(self.x_breakpoints)
        yb = _readonly(self.y_breakpoints)
        vals = _readonly(self.values)
        _check_breakpoints(xb, "x_breakpoints")
        _check_breakpoints(yb, "y_breakpoints")
        if vals.shape != (xb.size - 1, yb.size - 1):
            raise ValueError(
                f"cell_values shape {vals.shape} does not match grid "
                f"{(xb.size - 1, yb.size - 1)}")
        if not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise ValueError("cell values must be finite and nonnegative")
        for flag in (self.monotone_x, self.monotone_y):
            if flag not in MONOTONE_FLAGS:
                raise ValueError(f"monotone flag must be one of {MONOTONE_FLAGS}")
        object.__setattr__(self, "x_breakpoints", xb)
        object.__setattr__(self, "y_breakpoints", yb)
        object.__setattr__(self, "values", vals)
        if self.monotone_x == "decreasing" and np.any(np.diff(vals, axis=0) > 0):
            raise ValueError("kernel flagged decreasing in x but is not")
        if self.monotone_y == "decreasing" and np.any(np.diff(vals, axis=1) > 0):
            raise ValueError("kernel flagged decreasing in y but is not")
        if self.monotone_x == "increasing" and np.any(np.diff(vals, axis=0) < 0):
            raise ValueError("kernel flagged increasing in x but is not")
        if self.monotone_y == "increasing" and np.any(np.diff(vals, axis=1) < 0):
            raise ValueError("kernel flagged increasing in y but is not")

    @property
    def x_widths(self):
        return np.diff(self.x_breakpoints)

    @property
    def y_widths(self):
        return np.diff(self.y_breakpoints)

    @property
    def cell_areas(self):
        return np.outer(self.x_widths, self.y_widths)

    def _index(self, pts, bp):
        pts = np.asarray(pts, dtype=float)
        idx = np.searchsorted(bp, pts, side="right") - 1
        ok = (idx >= 0) & (idx < bp.size - 1) & (pts >= 0)
        return np.where(ok, idx, 0), ok

    def __call__(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        ix, okx = self._index(x, self.x_breakpoints)
        iy, oky = self._index(y, self.y_breakpoints)
        out = np.where(okx & oky, self.values[ix, iy], 0.0)
        return out if out.ndim else float(out)

    def is_nonincreasing(self):
        return bool(np.all(np.diff(self.values, axis=0) <= 0)
                    and np.all(np.diff(self.values, axis=1) <= 0))

    def transpose(self):
        return Grid2DKernel(self.y_breakpoints, self.x_breakpoints, self.values.T,
                            self.monotone_y, self.monotone_x)

    def to_json(self):
        return {
            "x_breakpoints": self.x_breakpoints.tolist(),
            "y_breakpoints": self.y_breakpoints.tolist(),
            "values": self.values.tolist(),
            "monotone": {"x": self.monotone_x, "y": self.monotone_y},
        }

    @classmethod
    def from_json(cls, data):
        if isinstance(data, str):
            data = json.loads(data)
        mono = data.get("monotone", {})
        return cls(data["x_breakpoints"], data["y_breakpoints"],
                   np.asarray(data.get("values", data.get("cell_values")), dtype=float),
                   mono.get("x"), mono.get("y"))


@dataclass(frozen=True, eq=False)
class AnalyticKernel:
    """K(x, y) given by a broadcasting evaluator.

    ``structure`` records a closed-form shape when there is one:
    ``"radial"`` for K = k(sqrt(x^2 + y^2)) and ``"sum"`` for K = k(x + y),
    with ``profile`` holding k.
    """

    evaluator: Callable
    monotone_x: Optional[str] = None
    monotone_y: Optional[str] = None
    structure: Optional[str] = None
    profile: Optional[AnalyticFunction] = None
    name: str = ""

    def __call__(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        with np.errstate(divide="ignore"):
            out = np.asarray(self.evaluator(x, y), dtype=float)
        return out if out.ndim else float(out)

    @classmethod
    def radial(cls, k, name=""):
        """K(x, y) = k(|(x, y)|) with k nonincreasing."""
        if k.monotone != "decreasing":
            raise ValueError("radial kernels need a profile flagged decreasing")
        return cls(lambda x, y: k(np.hypot(x, y)), "decreasing", "decreasing",
                   "radial", k, name or f"radial({k.name})")

    @classmethod
    def sum_of(cls, k, name=""):
        """K(x, y) = k(x + y) with k nonincreasing."""
        if k.monotone != "decreasing":
            raise ValueError("K = k(x+y) needs a profile flagged decreasing")
        return cls(lambda x, y: k(x + y), "decreasing", "decreasing", "sum", k,
                   name or f"sum({k.name})")

    def is_nonincreasing(self):
        return self.monotone_x == "decreasing" and self.monotone_y == "decreasing"


class HardyKernel(AnalyticKernel):
    """K(x, y) = 1 for 0 < y < x, else 0 (kernel of f -> integral over [0, x])."""

    def __init__(self):
        super().__init__(lambda x, y: np.where((y > 0) & (y < x), 1.0, 0.0),
                         "increasing", "decreasing", "hardy", None, "hardy")


class AveragingKernel(AnalyticKernel):
    """K(x, y) = 1/x for 0 < y < x (the running average)."""

    def __init__(self):
        def ev(x, y):
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where((y > 0) & (y < x), 1.0 / x, 0.0)
        super().__init__(ev, None, "decreasing", "averaging", None, "averaging")


# ----------------------------------------------------------------------------
# Integration entry points
# ----------------------------------------------------------------------------

def _points_for(f, a, b):
    pts = [k for k in getattr(f, "kinks", ()) if a < k < b]
    return pts


def integrate(f, a, b, q: QuadratureSpec = DEFAULT_QUAD):
    """Integral of ``f`` over [a, b].

    Exact for step and piecewise-linear input. Analytic input uses adaptive
    quadrature; a divergent integral comes back as ``inf`` and nonconvergence
    raises :class:`QuadratureError` carrying the partial estimate.
    """
    if a < 0:
        raise ValueError("integration starts at a >= 0")
    if a > b:
        raise ValueError(f"lower limit {a} exceeds upper limit {b}")
    if math.isinf(b):
        return integrate_tail(f, a, q)
    if isinstance(f, (StepFunction, PiecewiseLinear)):
        return f.integral(a, b)
    if isinstance(f, AnalyticFunction):
        b = min(b, f.domain_end)
        if a >= b:
            return 0.0
        if f.primitive is not None:
            return max(float(f.primitive(b)) - float(f.primitive(a)), 0.0)
        return integrate_callable(f, a, b, points=_points_for(f, a, b), **q.kwargs())
    if callable(f):
        return integrate_callable(f, a, b, **q.kwargs())
    raise TypeError(f"cannot integrate {type(f).__name__}")


def integrate_tail(f, a, q: QuadratureSpec = DEFAULT_QUAD):
    """Integral of ``f`` over [a, inf); ``inf`` marks a divergent integral."""
    if a < 0:
        raise ValueError("tail start must be nonnegative")
    if isinstance(f, (StepFunction, PiecewiseLinear)):
        return f.integral(a, math.inf)
    if not isinstance(f, AnalyticFunction):
        if callable(f):
            return integrate_tail_callable(f, a, **q.kwargs())
        raise TypeError(f"cannot integrate {type(f).__name__}")
    if math.isfinite(f.domain_end):
        return integrate(f, a, f.domain_end, q) if a < f.domain_end else 0.0
    hint = f.tail_hint
    if hint is None:
        return integrate_tail_callable(f, a, points=_points_for(f, a, math.inf), **q.kwargs())
    if hint.kind == "power":
        cut = max(a, 1.0) * 1024.0
        head = integrate(f, a, cut, q)
        f_cut = float(f(cut))
        if math.isinf(head):
            return math.inf
        if f_cut == 0.0:
            return head
        if hint.value >= -1.0:
            return math.inf
        return head + f_cut * cut / (-hint.value - 1.0)
    cut = a + 50.0 / hint.value
    head = integrate(f, a, cut, q)
    return head + float(f(cut)) / hint.value


def cumulative_integral(f, t, q: QuadratureSpec = DEFAULT_QUAD):
    """``integral over [0, t_i]`` for every entry of ``t`` (one pass over sorted t)."""
    t = np.asarray(t, dtype=float)
    flat = t.ravel()
    if isinstance(f, StepFunction):
        out = np.asarray(f.cumulative(flat), dtype=float)
        return out.reshape(t.shape) if t.ndim else float(out)
    order = np.argsort(flat)
    sorted_t = flat[order]
    pieces = []
    prev = 0.0
    for s in sorted_t:
        s = max(float(s), 0.0)
        pieces.append(integrate(f, prev, s, q) if s > prev else 0.0)
        prev = max(prev, s)
    cum = np.cumsum(pieces)
    out = np.empty_like(flat)
    out[order] = cum
    return out.reshape(t.shape) if t.ndim else float(out[0])


def quadrature_error_estimate(f, a, b, q: QuadratureSpec = DEFAULT_QUAD):
    """(value, error estimate) of the adaptive rule on [a, b], no fallbacks."""
    res = adaptive(f, a, b, q.abs_tol, q.rel_tol, q.max_subdivisions,
                   _points_for(f, a, b))
    return float(res.value), res.error


def discretize(f: AnalyticFunction, grid: Sequence[float], method: str = "average",
               q: QuadratureSpec = DEFAULT_QUAD) -> StepFunction:
    """Cell averages (or midpoint values) of ``f`` on the cells of ``grid``."""
    grid = np.asarray(grid, dtype=float)
    _check_breakpoints(grid, "grid")
    if grid.size < 2:
        raise ValueError("grid needs at least one cell")
    if method == "midpoint" and f.monotone != "decreasing":
        raise ValueError("midpoint discretization is reserved for decreasing functions")
    vals = []
    for a, b in zip(grid[:-1], grid[1:]):
        try:
            if method == "midpoint":
                v = float(f(0.5 * (a + b)))
            elif method == "average":
                v = integrate(f, a, b, q) / (b - a)
            else:
                raise ValueError(f"unknown discretization method {method!r}")
        except (QuadratureError, ArithmeticError, FloatingPointError) as exc:
            raise ValueError(f"evaluator failed inside cell [{a}, {b}): {exc}") from exc
        if not math.isfinite(v):
            raise ValueError(f"evaluator failed inside cell [{a}, {b}): non-finite average")
        vals.append(v)
    return StepFunction(grid, vals)


def discretize_kernel(K: AnalyticKernel, x_grid, y_grid, method: str = "midpoint") -> Grid2DKernel:
    """Cellwise values of an analytic kernel (midpoint or 4x4 Gauss average)."""
    xg = np.asarray(x_grid, dtype=float)
    yg = np.asarray(y_grid, dtype=float)
    _check_breakpoints(xg, "x_grid")
    _check_breakpoints(yg, "y_grid")
    if method == "midpoint":
        xm = 0.5 * (xg[:-1] + xg[1:])
        ym = 0.5 * (yg[:-1] + yg[1:])
        vals = K(xm[:, None], ym[None, :])
    elif method == "average":
        nodes, weights = np.polynomial.legendre.leggauss(4)
        vals = np.zeros((xg.size - 1, yg.size - 1))
        for nx, wx in zip(nodes, weights):
            xs = 0.5 * (xg[:-1] + xg[1:]) + 0.5 * np.diff(xg) * nx
            for ny, wy in zip(nodes, weights):
                ys = 0.5 * (yg[:-1] + yg[1:]) + 0.5 * np.diff(yg) * ny
                vals += 0.25 * wx * wy * K(xs[:, None], ys[None, :])
    else:
        raise ValueError(f"unknown discretization method {method!r}")
    vals = np.asarray(vals, dtype=float)
    if not np.all(np.isfinite(vals)):
        bad = np.argwhere(~np.isfinite(vals))[0]
        raise ValueError(f"kernel not finite in cell {tuple(int(i) for i in bad)}")
    mono_x = K.monotone_x if np.all(np.diff(vals, axis=0) <= 0) or K.monotone_x != "decreasing" else None
    mono_y = K.monotone_y if np.all(np.diff(vals, axis=1) <= 0) or K.monotone_y != "decreasing" else None
    if mono_x == "increasing" and np.any(np.diff(vals, axis=0) < 0):
        mono_x = None
    if mono_y == "increasing" and np.any(np.diff(vals, axis=1) < 0):
        mono_y = None
    return Grid2DKernel(xg, yg, vals, mono_x, mono_y)


def log_grid(lo=1e-3, hi=1e3, n=256):
    """Breakpoints 0, lo, ..., hi with ``n`` cells."""
    return np.concatenate([[0.0], np.logspace(math.log10(lo), math.log10(hi), n)])
