"""JSON descriptors for functions, kernels, N-functions, weights and operators."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from ..funcspace import (AnalyticFunction, AnalyticKernel, AveragingKernel,
                         Grid2DKernel, HardyKernel, StepFunction)
from ..operators import OperatorSpec
from ..orlicz import NFunction, Weight

__all__ = ["DescriptorError", "parse_function", "parse_kernel", "parse_nfunction",
           "parse_operator", "parse_profile", "parse_weight"]


class DescriptorError(ValueError):
    """An input descriptor is malformed or refers to something missing."""


def _exp_profile():
    return AnalyticFunction(lambda t: np.exp(-np.asarray(t, dtype=float)), monotone="decreasing",
                            primitive=lambda t: -np.expm1(-np.asarray(t, dtype=float)), name="exp")


def _power_profile(a, support=math.inf):
    a = float(a)
    if a > -1:
        prim = lambda t: np.minimum(np.asarray(t, dtype=float), support) ** (a + 1) / (a + 1)
    else:
        prim = None
    return AnalyticFunction(lambda t: np.asarray(t, dtype=float) ** a, domain_end=support,
                            monotone="decreasing" if a <= 0 else "increasing",
                            primitive=prim, name=f"t^{a:g}")


NAMED_PROFILES = {
    "exp": _exp_profile,
    "indicator": lambda: StepFunction.indicator(0.0, 1.0),
    "inv_sqrt": lambda: _power_profile(-0.5),
}


def _load_ref(ref, base: Path):
    path = (base / ref) if base is not None else Path(ref)
    if not path.exists():
        raise DescriptorError(f"referenced file {str(path)!r} does not exist")
    with open(path) as fh:
        return json.load(fh)


def parse_function(desc, base: Path = None):
    """Step function JSON, a named profile, ``{"power": a, "support": s}`` or ``{"ref": path}``."""
    if isinstance(desc, str):
        if desc not in NAMED_PROFILES:
            raise DescriptorError(f"unknown named function {desc!r}; known: {sorted(NAMED_PROFILES)}")
        return NAMED_PROFILES[desc]()
    if not isinstance(desc, dict):
        raise DescriptorError(f"function descriptor must be a string or object, got {desc!r}")
    if "ref" in desc:
        return parse_function(_load_ref(desc["ref"], base), base)
    if "breakpoints" in desc:
        try:
            return StepFunction.from_json(desc)
        except (ValueError, KeyError) as exc:
            raise DescriptorError(f"bad step function: {exc}") from exc
    if "power" in desc:
        return _power_profile(desc["power"], float(desc.get("support", math.inf)))
    raise DescriptorError(f"unrecognized function descriptor {desc!r}")


def parse_profile(desc, base: Path = None):
    """A nonincreasing profile k (step or analytic)."""
    k = parse_function(desc, base)
    if isinstance(k, StepFunction):
        if not k.is_nonincreasing():
            raise DescriptorError("profile must be nonincreasing")
    elif k.monotone != "decreasing":
        raise DescriptorError("profile must be nonincreasing")
    return k


def _as_analytic(k):
    if isinstance(k, StepFunction):
        return AnalyticFunction(k, monotone="decreasing", primitive=k.cumulative,
                                kinks=tuple(k.breakpoints[1:]), name="step")
    return k


def kantorovich_kernel():
    """(x^2 + y^2)^(-3/4), the radial kernel with profile s^(-3/2)."""
    prof = AnalyticFunction(lambda s: np.asarray(s, dtype=float) ** -1.5, monotone="decreasing",
                            name="s^-1.5")
    return AnalyticKernel(lambda x, y: (x * x + y * y) ** -0.75, "decreasing", "decreasing",
                          "radial", prof, "kantorovich")


def parse_kernel(desc, base: Path = None):
    if isinstance(desc, str):
        named = {"kantorovich": kantorovich_kernel, "hardy": HardyKernel,
                 "averaging": AveragingKernel,
                 "indicator_square": lambda: Grid2DKernel([0.0, 1.0], [0.0, 1.0], [[1.0]],
                                                          "decreasing", "decreasing"),
                 "sq_diff": lambda: AnalyticKernel(lambda x, y: (x - y) ** 2, name="sq_diff")}
        if desc not in named:
            raise DescriptorError(f"unknown named kernel {desc!r}; known: {sorted(named)}")
        return named[desc]()
    if not isinstance(desc, dict):
        raise DescriptorError(f"kernel descriptor must be a string or object, got {desc!r}")
    if "ref" in desc:
        return parse_kernel(_load_ref(desc["ref"], base), base)
    if "x_breakpoints" in desc:
        try:
            return Grid2DKernel.from_json(desc)
        except (ValueError, KeyError) as exc:
            raise DescriptorError(f"bad grid kernel: {exc}") from exc
    if "radial" in desc:
        return AnalyticKernel.radial(_as_analytic(parse_profile(desc["radial"], base)))
    if "sum" in desc:
        return AnalyticKernel.sum_of(_as_analytic(parse_profile(desc["sum"], base)))
    raise DescriptorError(f"unrecognized kernel descriptor {desc!r}")


def parse_nfunction(desc):
    try:
        return NFunction.from_json(desc)
    except (ValueError, KeyError, TypeError) as exc:
        raise DescriptorError(f"bad N-function descriptor {desc!r}: {exc}") from exc


def parse_weight(desc, base: Path = None):
    """``{"constant": c}``, ``{"power": a}`` or a step-function descriptor."""
    if desc is None:
        return Weight.constant(1.0)
    if isinstance(desc, dict) and "constant" in desc:
        return Weight.constant(float(desc["constant"]))
    if isinstance(desc, dict) and "power" in desc and "support" not in desc:
        return Weight.power(float(desc["power"]))
    return Weight(parse_function(desc, base))


def parse_operator(desc, base: Path = None):
    if not isinstance(desc, dict) or "kind" not in desc:
        raise DescriptorError(f"operator descriptor needs a 'kind', got {desc!r}")
    kernel = None
    if "kernel_ref" in desc:
        kernel = parse_kernel({"ref": desc["kernel_ref"]}, base)
    elif "kernel" in desc:
        kernel = (parse_function(desc["kernel"], base) if desc["kind"] == "convolution"
                  else parse_kernel(desc["kernel"], base))
    try:
        return OperatorSpec(desc["kind"], kernel, desc.get("kernel_ref"))
    except ValueError as exc:
        raise DescriptorError(str(exc)) from exc
