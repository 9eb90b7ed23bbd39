"""N-functions, weights, modulars and Luxemburg gauge norms."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .funcspace import (AnalyticFunction, DEFAULT_QUAD, PiecewiseLinear,
                        QuadratureSpec, StepFunction, cumulative_integral,
                        integrate, integrate_callable, integrate_tail,
                        integrate_tail_callable)

__all__ = [
    "CallableN", "Delta2Estimate", "NFunction", "PowerN", "TabulatedN", "Weight",
    "delta2_ratio", "down_dual_norm", "gauge_norm", "modular", "modular_curve",
]


def _out(x):
    x = np.asarray(x, dtype=float)
    return x if x.ndim else float(x)


class NFunction:
    """Base class: subclasses provide ``phi`` and ``__call__`` (the N-function)."""

    kind = "abstract"

    def __call__(self, t):
        raise NotImplementedError

    def phi(self, t):
        raise NotImplementedError

    def phi_inv(self, s):
        """Right-continuous inverse of the generator, by bisection."""
        return _out(_bisect_inverse(self.phi, s))

    def inverse(self, s):
        """Inverse of the N-function itself."""
        return _out(_bisect_inverse(self, s))

    def complementary(self) -> "NFunction":
        return CallableN(lambda t: _young_conjugate(self, t), self.phi_inv,
                         name=f"complement({self.name})", phi_inv=self.phi)

    def scaled(self, a: float) -> "NFunction":
        """a * Phi."""
        base = self
        return CallableN(lambda t: a * base(t), lambda t: a * base.phi(t),
                         name=f"{a:g}*{self.name}")

    @property
    def name(self):
        return self.kind

    def to_json(self):
        raise TypeError(f"{self.name} has no JSON descriptor")

    @staticmethod
    def power(p, c=1.0):
        return PowerN(p, c)

    @staticmethod
    def tabulated(knots):
        return TabulatedN.from_knots(knots)

    @staticmethod
    def from_json(data):
        if isinstance(data, str):
            data = json.loads(data)
        kind = data.get("kind")
        if kind == "power":
            return PowerN(float(data["p"]), float(data.get("c", 1.0)))
        if kind == "generic":
            return TabulatedN.from_knots(data["phi_knots"])
        if kind == "named":
            return NAMED[data["name"]]()
        raise ValueError(f"unknown N-function kind {kind!r}")


def _bisect_inverse(fn, s, iters=200):
    """Smallest t with fn(t) >= s for nondecreasing fn, elementwise."""
    s = np.asarray(s, dtype=float)
    flat = s.ravel()
    lo = np.zeros_like(flat)
    hi = np.ones_like(flat)
    with np.errstate(over="ignore"):
        for _ in range(2100):
            short = np.asarray(fn(hi)) < flat
            if not short.any():
                break
            hi = np.where(short, hi * 2.0, hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        below = np.asarray(fn(mid)) < flat
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= 4 * np.finfo(float).eps * hi):
            break
    return np.where(flat <= 0, 0.0, hi).reshape(s.shape)


def _young_conjugate(nf, t):
    # Young's equality: Psi(t) = t phi^-1(t) - Phi(phi^-1(t))
    t = np.asarray(t, dtype=float)
    s = np.asarray(nf.phi_inv(t), dtype=float)
    return _out(np.maximum(t * s - np.asarray(nf(s)), 0.0))


@dataclass(frozen=True, eq=False)
class PowerN(NFunction):
    """c t^p with p > 1."""

    p: float
    c: float = 1.0
    kind = "power"

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError("power N-functions need p > 1")
        if not self.c > 0:
            raise ValueError("coefficient must be positive")

    @property
    def conjugate_exponent(self):
        return self.p / (self.p - 1.0)

    @property
    def name(self):
        return f"{self.c:g}*t^{self.p:g}"

    def __call__(self, t):
        return _out(self.c * np.asarray(t, dtype=float) ** self.p)

    def phi(self, t):
        return _out(self.c * self.p * np.asarray(t, dtype=float) ** (self.p - 1.0))

    def phi_inv(self, s):
        return _out((np.asarray(s, dtype=float) / (self.c * self.p)) ** (1.0 / (self.p - 1.0)))

    def inverse(self, s):
        return _out((np.asarray(s, dtype=float) / self.c) ** (1.0 / self.p))

    def complementary(self):
        q = self.conjugate_exponent
        return PowerN(q, (self.c * self.p) ** (-(q - 1.0)) / q)

    def scaled(self, a):
        return PowerN(self.p, a * self.c)

    def to_json(self):
        return {"kind": "power", "p": self.p, "c": self.c}


@dataclass(frozen=True, eq=False)
class TabulatedN(NFunction):
    """Piecewise-linear generator through (t_i, phi_i), continued with the last slope."""

    t_knots: np.ndarray
    phi_knots: np.ndarray
    kind = "generic"

    def __post_init__(self):
        t = np.array(self.t_knots, dtype=float)
        v = np.array(self.phi_knots, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size < 2:
            raise ValueError("need at least two (t, phi) knots")
        if t[0] != 0 or v[0] != 0:
            raise ValueError("first knot must be (0, 0)")
        if np.any(np.diff(t) <= 0) or np.any(np.diff(v) <= 0):
            raise ValueError("knots must be strictly increasing in t and in phi")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "t_knots", t)
        object.__setattr__(self, "phi_knots", v)
        slopes = np.diff(v) / np.diff(t)
        prim = np.concatenate([[0.0], np.cumsum(0.5 * (v[:-1] + v[1:]) * np.diff(t))])
        object.__setattr__(self, "_slopes", np.append(slopes, slopes[-1]))
        object.__setattr__(self, "_prim", prim)

    @classmethod
    def from_knots(cls, knots):
        arr = np.asarray(knots, dtype=float)
        return cls(arr[:, 0], arr[:, 1])

    @classmethod
    def sample(cls, phi: Callable, t_knots):
        t = np.asarray(t_knots, dtype=float)
        return cls(t, np.asarray(phi(t), dtype=float))

    def _segment(self, t):
        return np.clip(np.searchsorted(self.t_knots, t, side="right") - 1, 0, self.t_knots.size - 1)

    def phi(self, t):
        t = np.asarray(t, dtype=float)
        i = self._segment(t)
        return _out(self.phi_knots[i] + self._slopes[i] * (t - self.t_knots[i]))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        i = self._segment(t)
        d = t - self.t_knots[i]
        return _out(self._prim[i] + self.phi_knots[i] * d + 0.5 * self._slopes[i] * d * d)

    def phi_inv(self, s):
        s = np.asarray(s, dtype=float)
        i = np.clip(np.searchsorted(self.phi_knots, s, side="right") - 1, 0, self.t_knots.size - 1)
        return _out(self.t_knots[i] + (s - self.phi_knots[i]) / self._slopes[i])

    def inverse(self, s):
        s = np.asarray(s, dtype=float)
        i = np.clip(np.searchsorted(self._prim, s, side="right") - 1, 0, self.t_knots.size - 1)
        rest = s - self._prim[i]
        a = self.phi_knots[i]
        # stable root of a d + m d^2 / 2 = rest
        d = 2.0 * rest / (a + np.sqrt(a * a + 2.0 * self._slopes[i] * rest))
        return _out(np.where(s <= 0, 0.0, self.t_knots[i] + d))

    def complementary(self):
        return TabulatedN(self.phi_knots, self.t_knots)

    def scaled(self, a):
        return TabulatedN(self.t_knots, a * self.phi_knots)

    @property
    def name(self):
        return f"tabulated[{self.t_knots.size}]"

    def to_json(self):
        return {"kind": "generic",
                "phi_knots": np.column_stack([self.t_knots, self.phi_knots]).tolist()}


class CallableN(NFunction):
    """An N-function given by closed-form callables."""

    kind = "callable"

    def __init__(self, fn, generator, name="callable", phi_inv=None, inverse=None):
        self.fn = fn
        self.generator = generator
        self.name_ = name
        self.phi_inv_fn = phi_inv
        self.inverse_fn = inverse

    @property
    def name(self):
        return self.name_

    def __call__(self, t):
        with np.errstate(over="ignore"):
            return _out(self.fn(np.asarray(t, dtype=float)))

    def phi(self, t):
        with np.errstate(over="ignore"):
            return _out(self.generator(np.asarray(t, dtype=float)))

    def phi_inv(self, s):
        if self.phi_inv_fn is not None:
            return _out(self.phi_inv_fn(np.asarray(s, dtype=float)))
        return super().phi_inv(s)

    def inverse(self, s):
        if self.inverse_fn is not None:
            return _out(self.inverse_fn(np.asarray(s, dtype=float)))
        return super().inverse(s)

    def to_json(self):
        if self.name_ in NAMED:
            return {"kind": "named", "name": self.name_}
        return super().to_json()


def exp_minus_one():
    """e^t - 1 (generator e^t)."""
    return CallableN(np.expm1, np.exp, name="exp_minus_one",
                     phi_inv=lambda s: np.log(np.maximum(s, 1.0)),
                     inverse=np.log1p)


NAMED = {"exp_minus_one": exp_minus_one}


# ----------------------------------------------------------------------------
# Weights
# ----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Weight:
    """A locally integrable weight u >= 0 with cumulative U(x) = integral of u over [0, x]."""

    u: object
    cumulative_fn: Optional[Callable] = None
    total_mass: Optional[str] = None

    def __post_init__(self):
        if self.total_mass not in (None, "finite", "infinite"):
            raise ValueError("total_mass must be 'finite' or 'infinite'")
        if self.total_mass is None:
            object.__setattr__(self, "total_mass", self._infer_mass())

    def _infer_mass(self):
        if isinstance(self.u, StepFunction):
            return "finite"
        if math.isfinite(getattr(self.u, "domain_end", math.inf)):
            return "finite"
        if self.cumulative_fn is not None:
            big = float(self.cumulative_fn(1e12))
            return "infinite" if math.isinf(big) or big > 1e3 * max(float(self.cumulative_fn(1e6)), 1e-300) else "finite"
        return "infinite" if math.isinf(integrate_tail(self.u, 1.0)) else "finite"

    @classmethod
    def constant(cls, c=1.0):
        c = float(c)
        return cls(AnalyticFunction.constant(c), lambda x: c * np.asarray(x, dtype=float),
                   "infinite" if c > 0 else "finite")

    @classmethod
    def power(cls, a):
        """u(x) = x^a, a > -1."""
        if not a > -1:
            raise ValueError("x^a is locally integrable only for a > -1")
        u = AnalyticFunction(lambda x: np.asarray(x, dtype=float) ** a,
                             monotone="decreasing" if a <= 0 else "increasing",
                             tail_hint=None, name=f"x^{a:g}")
        return cls(u, lambda x: np.asarray(x, dtype=float) ** (a + 1) / (a + 1), "infinite")

    def is_unit(self):
        return isinstance(self.u, AnalyticFunction) and self.u.name == "const(1)"

    def __call__(self, x):
        return self.u(x)

    def U(self, x):
        x = np.asarray(x, dtype=float)
        if self.cumulative_fn is not None:
            return _out(self.cumulative_fn(x))
        if isinstance(self.u, StepFunction):
            return _out(self.u.cumulative(x))
        return _out(cumulative_integral(self.u, x))

    def mass(self, a, b):
        """Integral of u over [a, b], vectorized over paired arrays."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if isinstance(self.u, StepFunction) or self.cumulative_fn is not None:
            fin_b = np.where(np.isinf(b), 0.0, b)
            ub = np.where(np.isinf(b), np.inf if self.total_mass == "infinite" else 0.0,
                          np.asarray(self.U(fin_b), dtype=float))
            if self.total_mass == "finite" and np.any(np.isinf(b)):
                total = (self.u.integral() if isinstance(self.u, StepFunction)
                         else integrate_tail(self.u, 0.0))
                ub = np.where(np.isinf(b), total, ub)
            return _out(np.maximum(ub - np.asarray(self.U(a), dtype=float), 0.0))
        out = [integrate(self.u, float(lo), float(hi)) for lo, hi in zip(a.ravel(), b.ravel())]
        return _out(np.array(out).reshape(a.shape))


# ----------------------------------------------------------------------------
# Modulars and gauge norms
# ----------------------------------------------------------------------------

def _as_callable(f):
    if isinstance(f, (StepFunction, PiecewiseLinear, AnalyticFunction)):
        return f
    if callable(f):
        return AnalyticFunction(f)
    raise TypeError(f"unsupported function type {type(f).__name__}")


def _support_end(f):
    if isinstance(f, StepFunction):
        return f.support_end
    if isinstance(f, PiecewiseLinear):
        return float(f.knots[-1])
    return getattr(f, "domain_end", math.inf)


def _kinks(f):
    if isinstance(f, PiecewiseLinear):
        return tuple(f.knots)
    return tuple(getattr(f, "kinks", ()))


def _quad_integral(g, kinks, end, q):
    """Integral of g over [0, end) with breakpoints; inf when divergent."""
    kw = q.kwargs()
    if math.isfinite(end):
        return integrate_callable(g, 0.0, end, points=kinks, **kw)
    cut = max([k for k in kinks if math.isfinite(k)] + [1.0])
    head = integrate_callable(g, 0.0, cut, points=kinks, **kw)
    if math.isinf(head):
        return math.inf
    tail = integrate_tail_callable(g, cut, **kw)
    return head + tail


def modular_curve(f, Phi: NFunction, u: Weight, q: QuadratureSpec = DEFAULT_QUAD):
    """Return ``lam -> integral of Phi(f / lam) u`` with per-call work minimized."""
    f = _as_callable(f)
    if isinstance(f, StepFunction):
        nz = f.values > 0
        vals = f.values[nz]
        masses = np.asarray(u.mass(f.breakpoints[:-1][nz], f.breakpoints[1:][nz]), dtype=float)
        if isinstance(Phi, PowerN):
            base = math.fsum(Phi.c * vals ** Phi.p * masses)
            return lambda lam: base * lam ** -Phi.p
        return lambda lam: math.fsum(np.asarray(Phi(vals / lam)) * masses)

    end = _support_end(f)
    kinks = _kinks(f)
    if isinstance(Phi, PowerN):
        base = _quad_integral(lambda t: Phi.c * np.asarray(f(t)) ** Phi.p * np.asarray(u(t)),
                              kinks, end, q)
        return lambda lam: base * lam ** -Phi.p

    def at(lam):
        return _quad_integral(lambda t: np.asarray(Phi(np.asarray(f(t)) / lam)) * np.asarray(u(t)),
                              kinks, end, q)
    return at


def modular(f, Phi: NFunction, u: Weight, lam: float, q: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Integral of Phi(f / lam) u; ``inf`` marks divergence."""
    if not lam > 0:
        raise ValueError("lam must be positive")
    return float(modular_curve(f, Phi, u, q)(lam))


def _is_zero(f):
    if isinstance(f, StepFunction):
        return f.is_zero()
    if isinstance(f, PiecewiseLinear):
        return not np.any(f.values > 0)
    return False


def gauge_norm(f, Phi: NFunction, u: Weight, rel_tol: float = 1e-10,
               cap: float = 1e150, q: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Luxemburg norm inf{lam > 0 : modular(lam) <= 1}.

    Returns ``inf`` when the modular exceeds 1 for every lam up to ``cap``
    (including the case of a divergent modular).
    """
    if _is_zero(f):
        return 0.0
    curve = modular_curve(f, Phi, u, q)

    def m(lam):
        try:
            return curve(lam)
        except OverflowError:
            return math.inf
    # start the bracket at the size of f so tiny or huge inputs need few steps
    scale = float(np.max(f.values)) if isinstance(f, (StepFunction, PiecewiseLinear)) else 1.0
    lo = hi = scale
    if m(hi) > 1:
        while m(hi) > 1:
            lo = hi
            hi *= 2.0
            if hi > cap * scale:
                return math.inf
    else:
        while m(lo) <= 1:
            hi = lo
            lo *= 0.5
            if lo < scale / cap:
                return 0.0
    while hi / lo - 1.0 > rel_tol:
        mid = math.sqrt(lo * hi)
        if not lo < mid < hi:
            break
        if m(mid) > 1:
            lo = mid
        else:
            hi = mid
    return hi


def down_dual_norm(h, Phi: NFunction, u: Weight, q: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Gauge norm of the running average t -> (1/t) integral of h over [0, t]."""
    if _is_zero(h):
        return 0.0
    if isinstance(h, StepFunction):
        bp = tuple(float(b) for b in h.breakpoints[1:])
        avg = AnalyticFunction(lambda t: h.cumulative(t) / np.maximum(t, 1e-300),
                               kinks=bp, tail_hint=None, name="running average")
    else:
        hh = _as_callable(h)
        avg = AnalyticFunction(lambda t: np.asarray(cumulative_integral(hh, t, q)) / t,
                               kinks=_kinks(hh), name="running average")
    return gauge_norm(avg, Phi, u, q=q)


@dataclass(frozen=True)
class Delta2Estimate:
    ratio: float
    verdict: str
    argmax: float

    def __float__(self):
        return float(self.ratio)


def delta2_ratio(Phi: NFunction, T: float = 1.0, grid_size: int = 200) -> Delta2Estimate:
    """Grid estimate of sup Phi(2t)/Phi(t) over [T, 1e6 T]."""
    if not T > 0:
        raise ValueError("T must be positive")
    if isinstance(Phi, PowerN):
        return Delta2Estimate(2.0 ** Phi.p, "bounded", T)
    t = np.logspace(math.log10(T), math.log10(T) + 6, grid_size)
    with np.errstate(over="ignore", invalid="ignore"):
        num = np.asarray(Phi(2 * t), dtype=float)
        den = np.asarray(Phi(t), dtype=float)
        r = num / den
    if not np.all(np.isfinite(r)):
        bad = int(np.argmax(~np.isfinite(r)))
        return Delta2Estimate(math.inf, "unbounded", float(t[bad]))
    last = r[t >= t[-1] / 10]
    verdict = "unbounded" if last[-1] > 1.01 * last[0] else "bounded"
    i = int(np.argmax(r))
    return Delta2Estimate(float(r[i]), verdict, float(t[i]))
