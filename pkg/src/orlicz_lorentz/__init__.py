"""Rearrangements, Orlicz gauge norms, integral operators and their boundedness conditions."""

from .funcspace import (AnalyticFunction, AnalyticKernel, AveragingKernel, Grid2DKernel,
                        HardyKernel, StepFunction)
from .orlicz import NFunction, PowerN, Weight, gauge_norm
from .rearrange import decreasing_rearrangement, double_star, iterated_rearrangement
from .operators import OperatorSpec, build_hardy_kernels, convolve

__version__ = "0.1.0"

__all__ = [
    "AnalyticFunction", "AnalyticKernel", "AveragingKernel", "Grid2DKernel", "HardyKernel",
    "NFunction", "OperatorSpec", "PowerN", "StepFunction", "Weight", "build_hardy_kernels",
    "convolve", "decreasing_rearrangement", "double_star", "gauge_norm",
    "iterated_rearrangement",
]
