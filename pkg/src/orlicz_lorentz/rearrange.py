"""Distribution functions and decreasing rearrangements."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .funcspace import (AnalyticFunction, AnalyticKernel, Grid2DKernel,
                        PiecewiseLinear, StepFunction, discretize_kernel,
                        log_grid)

__all__ = [
    "NonRearrangeable", "RearrangementResult", "bivariate_rearrangement",
    "decreasing_rearrangement", "distribution", "double_star",
    "iterated_rearrangement", "radial_profile", "sort_slabs",
]


class NonRearrangeable(ValueError):
    """Some super-level set of positive height has infinite measure."""


@dataclass(frozen=True)
class RearrangementResult:
    star: StepFunction
    total_measure: float

    def __call__(self, t):
        return self.star(t)


def distribution(f, lam):
    """Measure of {f > lam}; vectorized over ``lam``."""
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr < 0):
        raise ValueError("distribution needs lam >= 0")
    if isinstance(f, PiecewiseLinear):
        out = f.distribution(lam_arr.ravel()).reshape(lam_arr.shape)
        return out if out.ndim else float(out)
    lengths = f.lengths
    flat = lam_arr.ravel()
    out = np.array([math.fsum(lengths[f.values > v]) for v in flat]).reshape(lam_arr.shape)
    return out if out.ndim else float(out)


def sort_slabs(values, lengths):
    """Merge equal values, sort descending; returns (values, lengths) of positive slabs."""
    values = np.asarray(values, dtype=float)
    lengths = np.asarray(lengths, dtype=float)
    keep = values > 0
    values, lengths = values[keep], lengths[keep]
    if values.size == 0:
        return np.zeros(0), np.zeros(0)
    uniq, inverse = np.unique(values, return_inverse=True)
    merged = np.array([math.fsum(lengths[inverse == j]) for j in range(uniq.size)])
    return uniq[::-1], merged[::-1]


def _cumulative_breakpoints(lengths):
    # fsum prefix sums keep slab edges exact to rounding of each partial sum
    out = np.empty(lengths.size + 1)
    out[0] = 0.0
    acc = []
    for i, w in enumerate(lengths):
        acc.append(w)
        out[i + 1] = math.fsum(acc)
    return out


def decreasing_rearrangement(f: StepFunction) -> RearrangementResult:
    """f* as a step function: slabs sorted by value, ties merged."""
    vals, lens = sort_slabs(f.values, f.lengths)
    if vals.size == 0:
        return RearrangementResult(StepFunction.zero(), 0.0)
    bp = _cumulative_breakpoints(lens)
    return RearrangementResult(StepFunction(bp, vals), float(bp[-1]))


def double_star(f: StepFunction, t):
    """(1/t) times the integral of f* over [0, t]."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise ValueError("double_star needs t > 0")
    star = f if f.is_nonincreasing() else decreasing_rearrangement(f).star
    out = np.asarray(star.cumulative(t_arr)) / t_arr
    return out if out.ndim else float(out)


def radial_profile(k, n: int, t):
    """Rearrangement of x -> k(|x|) on R^n for nonincreasing k."""
    if isinstance(k, StepFunction):
        if not k.is_nonincreasing():
            raise ValueError("radial_profile needs a nonincreasing profile")
    elif getattr(k, "monotone", None) != "decreasing":
        raise ValueError("radial_profile needs a profile flagged decreasing")
    if int(n) != n or n < 1:
        raise ValueError("dimension n must be a positive integer")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise ValueError("radial_profile needs t > 0")
    # radius of the ball of volume t
    scale = math.exp(math.lgamma(n / 2 + 1) / n) / math.sqrt(math.pi)
    return k(scale * t_arr ** (1.0 / n))


# ----------------------------------------------------------------------------
# Two-variable rearrangements
# ----------------------------------------------------------------------------

def _merge_close(points, rel=1e-12):
    pts = np.unique(points)
    if pts.size < 2:
        return pts
    scale = max(float(pts[-1]), 1.0)
    keep = np.concatenate([[True], np.diff(pts) > rel * scale])
    return pts[keep]


def _rearrange_rows(bp, widths, values, max_breaks):
    """Rearrange each row of ``values`` (cells of ``widths``) onto a common grid."""
    stars = []
    for row in values:
        v, w = sort_slabs(row, widths)
        stars.append((v, _cumulative_breakpoints(w)))
    union = _merge_close(np.concatenate([s[1] for s in stars] + [[0.0]]))
    if union.size - 1 > max_breaks:
        warnings.warn(f"breakpoint union has {union.size - 1} cells; resampling to {max_breaks}",
                      RuntimeWarning, stacklevel=3)
        idx = np.unique(np.linspace(0, union.size - 1, max_breaks + 1).round().astype(int))
        union = union[idx]
        out = np.zeros((values.shape[0], union.size - 1))
        for i, (v, b) in enumerate(stars):
            if v.size == 0:
                continue
            cum = StepFunction(b, v).cumulative(union)
            out[i] = np.clip(np.diff(cum) / np.diff(union), 0.0, None)
        return union, out
    mids = 0.5 * (union[:-1] + union[1:])
    out = np.zeros((values.shape[0], union.size - 1))
    for i, (v, b) in enumerate(stars):
        if v.size == 0:
            continue
        idx = np.searchsorted(b, mids, side="right") - 1
        ok = idx < v.size
        out[i, ok] = v[idx[ok]]
    return union, out


def iterated_rearrangement(K, max_breaks: int = 4096, grid_cells: int = 256,
                           grid_range=(1e-3, 1e3)) -> Grid2DKernel:
    """Rearrange every x-section in y, then every resulting y-column in x.

    Analytic kernels are first sampled on a log grid with ``grid_cells``
    cells per axis over ``grid_range``.
    """
    if isinstance(K, AnalyticKernel):
        grid = log_grid(*grid_range, grid_cells)
        K = discretize_kernel(K, grid, grid)
    if K.is_nonincreasing():
        return K
    y_union, stage1 = _rearrange_rows(K.y_breakpoints, K.y_widths, K.values, max_breaks)
    x_union, stage2 = _rearrange_rows(K.x_breakpoints, K.x_widths, stage1.T, max_breaks)
    return Grid2DKernel(x_union, y_union, stage2.T, "decreasing", "decreasing")


def _grid_star(K: Grid2DKernel, t):
    vals, areas = sort_slabs(K.values.ravel(), K.cell_areas.ravel())
    if vals.size == 0:
        return np.zeros_like(t)
    cum = np.cumsum(areas)
    idx = np.searchsorted(cum, t, side="right")
    return np.where(idx < vals.size, vals[np.minimum(idx, vals.size - 1)], 0.0)


def _check_profile_tail(k):
    far, farther = float(k(1e12)), float(k(1e15))
    if farther > 0 and farther >= 0.999 * far:
        raise NonRearrangeable(
            f"profile does not decay: level sets below {farther:g} have infinite measure")


def _general_star(K: AnalyticKernel, t, probe_cap=1e12):
    if not K.is_nonincreasing():
        raise ValueError("general bivariate rearrangement needs a kernel nonincreasing in x and y")

    def reach(fn, lam):
        # sup{s: fn(s) > lam} for nonincreasing fn
        if fn(0.0) <= lam and fn(1e-300) <= lam:
            return 0.0
        hi = 1.0
        while fn(hi) > lam:
            hi *= 2.0
            if hi > probe_cap:
                return math.inf
        lo = 0.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if fn(mid) > lam:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-13 * hi:
                break
        return hi

    def measure(lam):
        X = reach(lambda x: K(x, 1e-300), lam)
        if math.isinf(X):
            raise NonRearrangeable(f"super-level set at height {lam:g} has infinite measure")
        if X == 0:
            return 0.0
        nodes, weights = np.polynomial.legendre.leggauss(64)
        xs = 0.5 * X * (nodes + 1.0)
        widths = []
        for x in xs:
            Y = reach(lambda y: K(x, y), lam)
            if math.isinf(Y):
                raise NonRearrangeable(f"super-level set at height {lam:g} has infinite measure")
            widths.append(Y)
        return 0.5 * X * float(np.dot(weights, widths))

    out = []
    for ti in np.atleast_1d(t):
        hi = float(K(1e-300, 1e-300))
        if not math.isfinite(hi):
            hi = 1e300
        lo = hi
        while measure(lo) <= ti:
            lo *= 0.5
            if lo < 1e-300:
                break
        if lo < 1e-300:
            out.append(0.0)
            continue
        for _ in range(200):
            mid = math.sqrt(lo * hi)
            if measure(mid) <= ti:
                hi = mid
            else:
                lo = mid
            if hi - lo <= 1e-10 * hi:
                break
        out.append(hi)
    return np.array(out)


def bivariate_rearrangement(K, t, mode: str = "measure"):
    """K*(t) with respect to planar measure on the quarter plane.

    ``mode="sqrt"`` gives the alternate form k(sqrt(t)) for radial kernels
    K = k(|(x, y)|); it is never substituted silently.
    """
    if mode not in ("measure", "sqrt"):
        raise ValueError("mode must be 'measure' or 'sqrt'")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise ValueError("bivariate_rearrangement needs t > 0")
    flat = t_arr.ravel()
    if isinstance(K, Grid2DKernel):
        if mode == "sqrt":
            raise ValueError("sqrt mode applies to radial analytic kernels only")
        out = _grid_star(K, flat)
    elif mode == "sqrt":
        if K.structure != "radial":
            raise ValueError("sqrt mode applies to radial kernels k(|(x, y)|) only")
        _check_profile_tail(K.profile)
        out = np.asarray(K.profile(np.sqrt(flat)), dtype=float)
    elif K.structure == "radial":
        _check_profile_tail(K.profile)
        # quarter disc of radius r has area pi r^2 / 4
        out = np.asarray(K.profile(2.0 * np.sqrt(flat / math.pi)), dtype=float)
    elif K.structure == "sum":
        _check_profile_tail(K.profile)
        # triangle x + y < r has area r^2 / 2
        out = np.asarray(K.profile(np.sqrt(2.0 * flat)), dtype=float)
    else:
        out = _general_star(K, flat)
    out = out.reshape(t_arr.shape)
    return out if out.ndim else float(out)
