"""Adaptive Gauss-Kronrod (7/15) quadrature with endpoint singularity handling.

The integrator works on plain vectorized callables ``g(x: ndarray) -> ndarray``.
An integrand may also be vector valued: ``g`` then returns shape ``(m, n)`` for
``n`` nodes and every result carries ``m`` components.

Divergence of a nonnegative integral is reported as ``inf``; it is data, not an
error. Genuine failures (interior trouble spots, NaN values) raise
:class:`QuadratureError`.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

# QUADPACK qk15 abscissae, descending, last entry is the centre.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:7], _XGK[7:], _XGK[6::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:7], _WGK[7:], _WGK[6::-1]])
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[[1, 3, 5]] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]
GAUSS_WEIGHTS[[9, 11, 13]] = _WG[2::-1]

_EPS = np.finfo(float).eps


class QuadratureError(RuntimeError):
    """Adaptive quadrature could not reach the requested tolerance."""

    def __init__(self, message, partial=None, error=None):
        super().__init__(message)
        self.partial = partial
        self.error = error


@dataclass(frozen=True)
class QuadResult:
    value: object
    error: float
    converged: bool
    divergent: bool = False
    n_intervals: int = 0
    # final partition (not necessarily the one that produced ``value``)
    intervals: tuple = field(default=(), repr=False)


def _as_components(values, n):
    arr = np.asarray(values, dtype=float)
    if arr.shape == ():
        arr = np.full(n, float(arr))
    if arr.ndim == 1:
        arr = arr[None, :]
    return arr


def gk15(g, a, b):
    """One Kronrod panel on [a, b]; returns (value[m], error, nodes_hit_inf)."""
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    x = c + h * NODES
    with np.errstate(all="ignore"):
        fx = _as_components(g(x), x.size)
    if np.isnan(fx).any():
        bad = x[np.isnan(fx).any(axis=0)][0]
        raise QuadratureError(f"integrand returned NaN at x={bad!r}")
    if np.isinf(fx).any():
        return np.full(fx.shape[0], np.inf), np.inf, True
    k = h * (fx @ KRONROD_WEIGHTS)
    gs = h * (fx @ GAUSS_WEIGHTS)
    return k, float(np.max(np.abs(k - gs))), False


def _total(vals):
    return np.array([math.fsum(col) for col in np.asarray(vals).T])


def adaptive(g, a, b, abs_tol, rel_tol, limit, points=()):
    """Global adaptive bisection on the panel with the largest error.

    The reported (value, error) pair is the one with the smallest error
    estimate seen so far, so a larger ``limit`` never reports a larger error.
    """
    cuts = sorted({float(p) for p in points if a < p < b})
    edges = [a, *cuts, b]
    heap = []
    counter = 0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        val, err, hit_inf = gk15(g, lo, hi)
        if hit_inf:
            return QuadResult(val if val.size > 1 else float(val[0]), math.inf,
                              True, True, counter + 1)
        heap.append((-err, counter, lo, hi, val))
        counter += 1
    if not heap:
        return QuadResult(0.0, 0.0, True, False, 0)
    heapq.heapify(heap)

    def snapshot():
        vals = [item[4] for item in heap]
        errs = [-item[0] for item in heap]
        return _total(vals), math.fsum(errs)

    value, err = snapshot()
    best = (err, value)
    n = len(heap)
    while err > max(abs_tol, rel_tol * float(np.max(np.abs(value)))) and n < limit:
        neg_err, _, lo, hi, val = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if hi - lo <= 1e4 * _EPS * max(abs(lo), abs(hi)) or not lo < mid < hi:
            heapq.heappush(heap, (neg_err, counter, lo, hi, val))
            counter += 1
            break
        for l2, h2 in ((lo, mid), (mid, hi)):
            v2, e2, hit_inf = gk15(g, l2, h2)
            if hit_inf:
                return QuadResult(v2 if v2.size > 1 else float(v2[0]), math.inf,
                                  True, True, n + 1)
            heapq.heappush(heap, (-e2, counter, l2, h2, v2))
            counter += 1
        n += 1
        value, err = snapshot()
        if err < best[0]:
            best = (err, value)
    err, value = best
    intervals = tuple((it[2], it[3]) for it in heap)
    tol = max(abs_tol, rel_tol * float(np.max(np.abs(value))))
    scalar = value if value.size > 1 else float(value[0])
    return QuadResult(scalar, err, err <= tol, False, len(intervals), intervals)


def _worst_interval(g, intervals):
    worst, worst_err = None, -1.0
    for lo, hi in intervals:
        _, e, _ = gk15(g, lo, hi)
        if e > worst_err:
            worst, worst_err = (lo, hi), e
    return worst


def _shell_series(g, e, h, direction, abs_tol, rel_tol, limit):
    """Sum dyadic shells approaching the endpoint ``e`` from one side.

    Shell k covers distances [h 2^-(k+1), h 2^-k] from ``e``. Geometric decay
    of the shell masses is extrapolated; non-decaying masses mean divergence.
    """
    # nodes must stay distinguishable from e in floating point
    if e == 0.0:
        k_max = 400
    else:
        k_max = int(min(400, math.log2(h) - math.log2(256 * _EPS * abs(e))))
    masses = []
    for k in range(max(k_max, 8)):
        near = h * 2.0 ** (-k - 1)
        far = h * 2.0 ** (-k)
        lo, hi = (e + near, e + far) if direction > 0 else (e - far, e - near)
        res = adaptive(g, lo, hi, abs_tol * 1e-3, rel_tol, limit)
        if res.divergent:
            return math.inf, math.inf, True
        if not res.converged:
            raise QuadratureError("shell integral failed to converge", res.value, res.error)
        masses.append(float(res.value))
        total = math.fsum(masses)
        if k < 6:
            continue
        d = masses[-6:]
        if all(x == 0.0 for x in d[-3:]) or d[-1] <= 1e-3 * max(abs_tol, rel_tol * total) \
                and d[-2] > d[-1]:
            return total, d[-1], False
        if min(d) <= 0.0:
            continue
        ratios = [d[i + 1] / d[i] for i in range(5)]
        if all(r >= 0.999 for r in ratios):
            return math.inf, math.inf, True
        r = ratios[-1]
        if r < 0.999 and abs(ratios[-1] - ratios[-2]) <= 1e-3 * r:
            tail = d[-1] * r / (1.0 - r)
            drift = abs(ratios[-1] - ratios[-2]) / (1.0 - r) ** 2 * d[-1]
            tol = max(abs_tol, rel_tol * (total + tail))
            if tail <= tol or drift <= tol or k >= 40:
                return total + tail, drift, False
    raise QuadratureError("endpoint shells did not settle", math.fsum(masses), None)


def integrate_callable(g, a, b, abs_tol=1e-13, rel_tol=1e-11, limit=200, points=()):
    """Integrate a scalar vectorized callable over a finite [a, b].

    Returns a float; ``inf`` for a detected divergent (nonnegative) integral.
    """
    if a > b:
        raise ValueError(f"lower limit {a} exceeds upper limit {b}")
    if a == b:
        return 0.0
    cuts = sorted({float(p) for p in points if a < p < b})
    edges = [a, *cuts, b]
    parts = [_integrate_piece(g, lo, hi, abs_tol, rel_tol, limit, 0)
             for lo, hi in zip(edges[:-1], edges[1:])]
    if any(math.isinf(p) for p in parts):
        return math.inf
    return math.fsum(parts)


PROBE_LIMIT = 40


def _integrate_piece(g, a, b, abs_tol, rel_tol, limit, depth):
    # a short first pass; endpoint trouble goes to the shell series at once
    res = adaptive(g, a, b, abs_tol, rel_tol, min(limit, PROBE_LIMIT))
    if res.divergent:
        return math.inf
    if res.converged:
        return float(res.value)
    lo, hi = _worst_interval(g, res.intervals)
    near = 1e-6 * (b - a)
    at_left, at_right = lo - a <= near, b - hi <= near
    if not (at_left or at_right) and limit > PROBE_LIMIT:
        res = adaptive(g, a, b, abs_tol, rel_tol, limit)
        if res.divergent:
            return math.inf
        if res.converged:
            return float(res.value)
        lo, hi = _worst_interval(g, res.intervals)
        at_left, at_right = lo - a <= near, b - hi <= near
    if not (at_left or at_right):
        raise QuadratureError(
            f"no convergence on [{a}, {b}]: trouble near {0.5 * (lo + hi)!r}",
            res.value, res.error)
    if depth >= 2:
        raise QuadratureError(f"no convergence on [{a}, {b}]", res.value, res.error)
    h = 0.5 * (b - a)
    if at_left:
        shells, _, div = _shell_series(g, a, h, +1, abs_tol, rel_tol, limit)
        rest = 0.0 if div else _integrate_piece(g, a + h, b, abs_tol, rel_tol, limit, depth + 1)
    else:
        shells, _, div = _shell_series(g, b, h, -1, abs_tol, rel_tol, limit)
        rest = 0.0 if div else _integrate_piece(g, a, b - h, abs_tol, rel_tol, limit, depth + 1)
    if div or math.isinf(rest):
        return math.inf
    return shells + rest


def integrate_tail_callable(g, a, abs_tol=1e-13, rel_tol=1e-11, limit=200, points=()):
    """Integrate over [a, inf) through the map s -> a + s/(1-s)."""
    if a < 0:
        raise ValueError("tail start must be nonnegative")

    def transformed(s):
        s = np.asarray(s, dtype=float)
        one_minus = 1.0 - s
        inside = one_minus > 0.0
        out = np.zeros_like(s)
        with np.errstate(all="ignore"):
            y = a + s[inside] / one_minus[inside]
            out[inside] = np.asarray(g(y), dtype=float) / one_minus[inside] ** 2
        # zero integrand stays zero where y overflows
        out[inside & (out == 0.0)] = 0.0
        return out

    mapped = [(p - a) / (1.0 + p - a) for p in points if p > a]
    return integrate_callable(transformed, 0.0, 1.0, abs_tol, rel_tol, limit, mapped)


def integrate_vector(g, a, b, abs_tol=1e-13, rel_tol=1e-11, limit=200, points=()):
    """Integrate a vector-valued callable (returns (m, n)); no divergence handling."""
    if a == b:
        return None
    res = adaptive(g, a, b, abs_tol, rel_tol, limit, points)
    if res.divergent:
        raise QuadratureError("vector integrand produced infinite values")
    if not res.converged:
        raise QuadratureError("vector quadrature did not converge", res.value, res.error)
    return np.atleast_1d(res.value)
