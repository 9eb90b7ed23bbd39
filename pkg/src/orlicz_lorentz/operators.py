"""Integral operators on step data: Hardy operators, convolution, kernel operators."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .funcspace import (DEFAULT_QUAD, AnalyticFunction, AnalyticKernel,
                        AveragingKernel, Grid2DKernel, HardyKernel,
                        PiecewiseLinear, QuadratureSpec, StepFunction,
                        integrate, integrate_callable, integrate_tail,
                        integrate_tail_callable)
from .rearrange import decreasing_rearrangement

__all__ = [
    "Convolution", "HardyKernels", "OperatorSpec", "apply_kernel",
    "associate_apply", "build_hardy_kernels", "convolve", "hardy_I", "hardy_I2", "step_I2",
    "oneil_majorant", "product", "s_transform",
]


def _out(x):
    x = np.asarray(x, dtype=float)
    return x if x.ndim else float(x)


def hardy_I(f, t):
    """Integral of f over [0, t]."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("hardy_I needs t >= 0")
    if isinstance(f, StepFunction):
        return _out(f.cumulative(t))
    return _out([integrate(f, 0.0, float(s)) for s in t.ravel()]).reshape(t.shape) \
        if t.ndim else integrate(f, 0.0, float(t))


def step_I2(f: StepFunction):
    """Vectorized t -> (I2 f)(t) for a step function (tables built once)."""
    # I f and I2 f at the breakpoints, then a quadratic on each slab
    bp, v, w = f.breakpoints, f.values, f.lengths
    I1 = np.array([math.fsum(v[:i] * w[:i]) for i in range(bp.size)])
    pieces = I1[:-1] * w + 0.5 * v * w * w
    I2 = np.array([math.fsum(pieces[:i]) for i in range(bp.size)])
    slopes = np.append(v, 0.0)

    def ev(t):
        t = np.asarray(t, dtype=float)
        i = np.clip(np.searchsorted(bp, t, side="right") - 1, 0, bp.size - 1)
        d = t - bp[i]
        return I2[i] + I1[i] * d + 0.5 * slopes[i] * d * d
    return ev


def hardy_I2(f, t):
    """Integral of f(s)(t - s) over [0, t]."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("hardy_I2 needs t >= 0")
    flat = t_arr.ravel()
    if isinstance(f, StepFunction):
        out = step_I2(f)(flat)
    else:
        out = [integrate_callable(lambda y, s=s: np.asarray(f(y)) * (s - y), 0.0, s,
                                  points=getattr(f, "kinks", ())) if s > 0 else 0.0
               for s in flat]
    return _out(np.array(out).reshape(t_arr.shape))


def product(f: StepFunction, g: StepFunction) -> StepFunction:
    """Pointwise product on the union of breakpoints."""
    bp = np.union1d(f.breakpoints, g.breakpoints)
    left = bp[:-1]
    return StepFunction(bp, f(left) * g(left))


# ----------------------------------------------------------------------------
# Convolution
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class Convolution:
    """f * g: ``exact`` is the piecewise-linear result, ``step`` its cell averages."""

    exact: PiecewiseLinear
    step: StepFunction

    def __call__(self, x):
        return self.exact(x)


def _convolve_at(f: StepFunction, g: StepFunction, x):
    # (f*g)(x) = sum_j w_j [F(x - b_j) - F(x - b_{j+1})]
    x = np.asarray(x, dtype=float)
    F = lambda s: np.asarray(f.cumulative(np.maximum(s, 0.0)), dtype=float)
    b = g.breakpoints
    terms = g.values[None, :] * (F(x[:, None] - b[None, :-1]) - F(x[:, None] - b[None, 1:]))
    return np.array([math.fsum(row) for row in terms])


def convolve(f: StepFunction, g: StepFunction, resolution: int = 1024) -> Convolution:
    """Exact convolution of two compactly supported step functions on the line."""
    if resolution is None or int(resolution) < 1:
        raise ValueError("resolution must be a positive integer")
    knots = np.unique(np.add.outer(f.breakpoints, g.breakpoints).ravel())
    vals = np.clip(_convolve_at(f, g, knots), 0.0, None)
    exact = PiecewiseLinear(knots, vals)
    return Convolution(exact, exact.to_step(int(resolution)))


# ----------------------------------------------------------------------------
# Kernel operators
# ----------------------------------------------------------------------------

def _slab_masses(f: StepFunction, bp):
    """Integral of f over each cell of ``bp``."""
    return np.diff(np.asarray(f.cumulative(bp), dtype=float))


def _grid_rows(K: Grid2DKernel, x):
    ix = np.searchsorted(K.x_breakpoints, x, side="right") - 1
    ok = (ix >= 0) & (ix < K.values.shape[0])
    return np.where(ok, ix, 0), ok


def _quad_apply(kernel_slice, f, q):
    """Integral of kernel_slice(y) f(y) over R+."""
    if isinstance(f, StepFunction):
        parts = []
        for a, b, v in zip(f.breakpoints[:-1], f.breakpoints[1:], f.values):
            if v == 0:
                continue
            val = integrate_callable(kernel_slice, a, b, **q.kwargs())
            if math.isinf(val):
                return math.inf
            parts.append(v * val)
        return math.fsum(parts)
    g = lambda y: np.asarray(kernel_slice(y)) * np.asarray(f(y))
    end = getattr(f, "domain_end", math.inf)
    kinks = tuple(getattr(f, "kinks", ()))
    if math.isfinite(end):
        return integrate_callable(g, 0.0, end, points=kinks, **q.kwargs())
    cut = max([1.0, *kinks])
    head = integrate_callable(g, 0.0, cut, points=kinks, **q.kwargs())
    return head + integrate_tail_callable(g, cut, **q.kwargs())


def apply_kernel(K, f, x, q: QuadratureSpec = DEFAULT_QUAD):
    """(T_K f)(x) = integral of K(x, y) f(y) dy; ``inf`` marks divergence."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr <= 0):
        raise ValueError("apply_kernel needs x > 0")
    flat = x_arr.ravel()
    if isinstance(K, AveragingKernel):
        out = np.asarray(hardy_I(f, flat)) / flat
    elif isinstance(K, HardyKernel):
        out = np.asarray(hardy_I(f, flat))
    elif isinstance(K, Grid2DKernel) and isinstance(f, StepFunction):
        masses = _slab_masses(f, K.y_breakpoints)
        ix, ok = _grid_rows(K, flat)
        out = np.array([math.fsum(K.values[i] * masses) if good else 0.0
                        for i, good in zip(ix, ok)])
    else:
        out = np.array([_quad_apply(lambda y, s=s: K(s, y), f, q) for s in flat])
    return _out(out.reshape(x_arr.shape))


def associate_apply(K, g, y, q: QuadratureSpec = DEFAULT_QUAD):
    """(T'_K g)(y) = integral of K(x, y) g(x) dx."""
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr <= 0):
        raise ValueError("associate_apply needs y > 0")
    flat = y_arr.ravel()
    if isinstance(K, AveragingKernel) and isinstance(g, StepFunction):
        a, b, v = g.breakpoints[:-1], g.breakpoints[1:], g.values
        out = []
        for s in flat:
            lo = np.maximum(a, s)
            ratio = np.where(b > lo, b / np.where(b > lo, lo, 1.0), 1.0)
            out.append(math.fsum(v * np.log(ratio)))
        out = np.array(out)
    elif isinstance(K, HardyKernel) and isinstance(g, StepFunction):
        out = np.array([g.integral(s, math.inf) for s in flat])
    elif isinstance(K, Grid2DKernel):
        return apply_kernel(K.transpose(), g, y, q)
    else:
        out = np.array([_quad_apply(lambda x, s=s: K(x, s), g, q) for s in flat])
    return _out(out.reshape(y_arr.shape))


def s_transform(K, g, x, q: QuadratureSpec = DEFAULT_QUAD):
    """(S g)(x) = integral of T'_K g over [0, x]."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr <= 0):
        raise ValueError("s_transform needs x > 0")
    flat = x_arr.ravel()
    if isinstance(g, StepFunction) and g.is_zero():
        return _out(np.zeros(x_arr.shape))
    if isinstance(K, AveragingKernel) and isinstance(g, StepFunction):
        head = np.asarray(g.cumulative(flat), dtype=float)
        out = head + flat * np.asarray(associate_apply(K, g, flat, q))
    elif isinstance(K, Grid2DKernel) and isinstance(g, StepFunction):
        col = apply_kernel(K.transpose(), g, 0.5 * (K.y_breakpoints[:-1] + K.y_breakpoints[1:]), q)
        image = StepFunction(K.y_breakpoints, np.atleast_1d(col))
        out = np.asarray(image.cumulative(flat), dtype=float)
    else:
        out = np.array([integrate_callable(lambda z: np.asarray(associate_apply(K, g, np.maximum(z, 1e-300), q)),
                                           0.0, s, **q.kwargs()) for s in flat])
    return _out(out.reshape(x_arr.shape))


# ----------------------------------------------------------------------------
# M1 / M2 and the operators H1 / H2
# ----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HardyKernels:
    """M1(x, y) = int_0^x L(y, z) dz and M2(a, b) = M1(1/b, 1/a)."""

    L: object
    q: QuadratureSpec = DEFAULT_QUAD

    def M1(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        L = self.L
        if isinstance(L, Grid2DKernel):
            iy, ok = _grid_rows(L, y)
            zb = L.y_breakpoints
            cum = np.concatenate([np.zeros((L.values.shape[0], 1)),
                                  np.cumsum(L.values * L.y_widths, axis=1)], axis=1)
            xc = np.clip(x, 0.0, zb[-1])
            j = np.clip(np.searchsorted(zb, xc, side="right") - 1, 0, zb.size - 2)
            val = cum[iy, j] + L.values[iy, j] * (xc - zb[j])
            return _out(np.where(ok & (x > 0), val, 0.0))
        if L.structure == "sum" and L.profile is not None and L.profile.primitive is not None:
            P = L.profile.primitive
            return _out(np.asarray(P(y + x)) - np.asarray(P(y)))
        flat = [integrate_callable(lambda z, yy=yy: L(yy, z), 0.0, xx, **self.q.kwargs())
                if xx > 0 else 0.0 for xx, yy in zip(x.ravel(), y.ravel())]
        return _out(np.array(flat).reshape(x.shape))

    def M2(self, a, b):
        a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
        with np.errstate(divide="ignore"):
            return self.M1(1.0 / b, 1.0 / a)

    def H1(self, f, x):
        """(H1 f)(x) = integral over [0, x] of M1(x, y) f(y) dy."""
        x_arr = np.asarray(x, dtype=float)
        out = []
        for s in x_arr.ravel():
            if isinstance(self.L, Grid2DKernel) and isinstance(f, StepFunction):
                # M1(s, .) is constant on the rows of L
                bp = np.union1d(self.L.x_breakpoints, f.breakpoints)
                bp = np.append(bp[bp < s], s)
                left = bp[:-1]
                masses = _slab_masses(f, bp)
                out.append(math.fsum(np.asarray(self.M1(s, left)) * masses))
            else:
                pts = tuple(getattr(f, "breakpoints", ()))
                out.append(integrate_callable(
                    lambda y, s=s: np.asarray(self.M1(s, y)) * np.asarray(f(y)), 0.0, s,
                    points=pts, **self.q.kwargs()))
        return _out(np.array(out).reshape(x_arr.shape))

    def H2(self, g, y):
        """(H2 g)(y) = integral over [0, y] of M2(y, x) g(x) dx."""
        y_arr = np.asarray(y, dtype=float)
        out = []
        for s in y_arr.ravel():
            pts = list(getattr(g, "breakpoints", ()))
            if isinstance(self.L, Grid2DKernel):
                pts += [1.0 / b for b in self.L.y_breakpoints[1:]]
            out.append(integrate_callable(
                lambda x, s=s: np.asarray(self.M2(s, np.maximum(x, 1e-300))) * np.asarray(g(x)),
                0.0, s, points=pts, **self.q.kwargs()))
        return _out(np.array(out).reshape(y_arr.shape))


def build_hardy_kernels(L, q: QuadratureSpec = DEFAULT_QUAD) -> HardyKernels:
    """M1/M2 evaluators for a kernel nonincreasing in both variables."""
    if isinstance(L, Grid2DKernel):
        if not L.is_nonincreasing():
            raise ValueError("build_hardy_kernels needs L nonincreasing in both variables")
    elif not L.is_nonincreasing():
        raise ValueError("build_hardy_kernels needs L flagged decreasing in both variables")
    return HardyKernels(L, q)


# ----------------------------------------------------------------------------
# O'Neil majorant
# ----------------------------------------------------------------------------

def oneil_majorant(f: StepFunction, g: StepFunction, t: float):
    """Right side of the rearranged convolution bound and the pointwise majorant at t.

    Returns ``(rhs, integrand)`` with
    rhs = If*(t) Ig*(t) + t int_t^inf f* g* and
    integrand = f*(t) Ig*(t) + g*(t) If*(t) + int_t^inf f* g*.
    """
    if not t > 0:
        raise ValueError("oneil_majorant needs t > 0")
    fs = decreasing_rearrangement(f).star
    gs = decreasing_rearrangement(g).star
    Ff, Fg = fs.cumulative(t), gs.cumulative(t)
    tail = product(fs, gs).integral(t, math.inf)
    return Ff * Fg + t * tail, fs(t) * Fg + gs(t) * Ff + tail


# ----------------------------------------------------------------------------
# Operator descriptors
# ----------------------------------------------------------------------------

OPERATOR_KINDS = ("identity", "zero", "hardy_I", "hardy_I2", "averaging", "convolution",
                  "kernel", "associate", "s_transform", "h1", "h2")


@dataclass(frozen=True, eq=False)
class OperatorSpec:
    """A named operator; ``kernel`` holds the kernel, profile or L it needs."""

    kind: str
    kernel: Optional[object] = None
    kernel_ref: Optional[str] = None
    q: QuadratureSpec = DEFAULT_QUAD

    def __post_init__(self):
        if self.kind not in OPERATOR_KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}")
        needs = {"convolution", "kernel", "associate", "s_transform", "h1", "h2"}
        if self.kind in needs and self.kernel is None:
            raise ValueError(f"operator {self.kind!r} needs a kernel")
        if self.kind in ("h1", "h2"):
            build_hardy_kernels(self.kernel, self.q)

    def apply(self, f, x):
        k = self.kind
        if k == "identity":
            return _out(f(np.asarray(x, dtype=float)))
        if k == "zero":
            return _out(np.zeros(np.shape(x)))
        if k == "hardy_I":
            return hardy_I(f, x)
        if k == "hardy_I2":
            return hardy_I2(f, x)
        if k == "averaging":
            return apply_kernel(AveragingKernel(), f, x, self.q)
        if k == "convolution":
            return convolve(f, self.kernel, 1).exact(x)
        if k == "kernel":
            return apply_kernel(self.kernel, f, x, self.q)
        if k == "associate":
            return associate_apply(self.kernel, f, x, self.q)
        if k == "s_transform":
            return s_transform(self.kernel, f, x, self.q)
        hk = build_hardy_kernels(self.kernel, self.q)
        return hk.H1(f, x) if k == "h1" else hk.H2(f, x)

    def image(self, f) -> AnalyticFunction:
        """T f as a function of x (evaluated lazily)."""
        kinks = tuple(float(b) for b in getattr(f, "breakpoints", ())[1:])
        if isinstance(self.kernel, Grid2DKernel):
            kinks += tuple(float(b) for b in self.kernel.x_breakpoints[1:])
        if self.kind == "convolution":
            conv = convolve(f, self.kernel, 1).exact
            return AnalyticFunction(conv, kinks=tuple(conv.knots[1:]), name="convolution")

        def ev(x):
            x = np.asarray(x, dtype=float)
            out = np.zeros(x.shape)
            pos = x > 0
            if pos.any():
                out[pos] = np.asarray(self.apply(f, x[pos]), dtype=float)
            return out
        return AnalyticFunction(ev, kinks=kinks, name=self.kind)

    def to_json(self):
        out = {"kind": self.kind}
        if self.kernel_ref is not None:
            out["kernel_ref"] = self.kernel_ref
        elif self.kernel is not None and hasattr(self.kernel, "to_json"):
            out["kernel"] = self.kernel.to_json()
        return out
