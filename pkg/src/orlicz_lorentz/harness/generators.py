"""Seeded random inputs for the property suites."""

from __future__ import annotations

import numpy as np

from ..funcspace import Grid2DKernel, StepFunction

__all__ = ["GENERATOR_KINDS", "MAX_GRID", "MAX_SLABS", "generate", "trial_rng"]

MAX_SLABS = 1000
MAX_GRID = 512
GENERATOR_KINDS = ("step", "decreasing_step", "decreasing_kernel_profile", "grid_kernel")


def trial_rng(seed: int, trial: int = 0) -> np.random.Generator:
    """Independent stream per (seed, trial)."""
    return np.random.default_rng([int(seed), int(trial)])


def _widths(rng, n):
    return rng.uniform(0.05, 1.0, n)


def _step(rng, n, ties):
    if ties:
        values = rng.integers(0, 5, n) / 4.0
    else:
        values = rng.uniform(0.0, 1.0, n)
        values[rng.uniform(size=n) < 0.15] = 0.0
    return StepFunction.from_slabs(_widths(rng, n), values)


def generate(kind: str, seed: int = 0, size: int = 8, trial: int = 0, *, ties: bool = False,
             monotone: bool = False, extent: float = 1.0, rng=None):
    """Random instance of ``kind``; the same arguments give the same output."""
    if kind not in GENERATOR_KINDS:
        raise ValueError(f"unknown generator kind {kind!r}; expected one of {GENERATOR_KINDS}")
    size = int(size)
    if size < 1:
        raise ValueError("size must be at least 1")
    limit = MAX_GRID if kind == "grid_kernel" else MAX_SLABS
    if size > limit:
        raise ValueError(f"size {size} exceeds the bound {limit} for {kind}")
    rng = trial_rng(seed, trial) if rng is None else rng

    if kind == "step":
        return _step(rng, size, ties)
    if kind in ("decreasing_step", "decreasing_kernel_profile"):
        values = np.sort(rng.uniform(0.05, 1.0, size))[::-1]
        if ties:
            values = np.sort(rng.integers(1, 5, size) / 4.0)[::-1]
        return StepFunction.from_slabs(_widths(rng, size), values)

    values = rng.uniform(0.0, 1.0, (size, size))
    if monotone:
        # sorting columns keeps previously sorted rows sorted
        values = -np.sort(-values, axis=1)
        values = -np.sort(-values, axis=0)
    bp = np.linspace(0.0, extent, size + 1)
    flag = "decreasing" if monotone else None
    return Grid2DKernel(bp, bp, values, flag, flag)
