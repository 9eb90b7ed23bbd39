import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate as sci

from orlicz_lorentz.funcspace import (AnalyticFunction, AnalyticKernel, AveragingKernel,
                                      Grid2DKernel, HardyKernel, StepFunction)
from orlicz_lorentz.operators import (OperatorSpec, apply_kernel, associate_apply,
                                      build_hardy_kernels, convolve, hardy_I, hardy_I2,
                                      oneil_majorant, s_transform)
from orlicz_lorentz.rearrange import decreasing_rearrangement
from conftest import chi, step_functions

EXP = AnalyticFunction(lambda t: np.exp(-t), monotone="decreasing",
                       primitive=lambda t: -np.expm1(-np.asarray(t, dtype=float)), name="exp")
UNIT_SQUARE = Grid2DKernel([0, 1], [0, 1], [[1.0]], "decreasing", "decreasing")
ZERO = StepFunction([0, 1], [0.0])


class TestHardy:
    def test_first_order(self):
        assert hardy_I(chi(), 0.5) == 0.5
        assert hardy_I(chi(), 3.0) == 1.0

    @given(step_functions(), step_functions(), st.floats(0, 5), st.floats(0, 5), st.floats(0, 30))
    def test_linear(self, f, g, a, b, t):
        bp = np.union1d(f.breakpoints, g.breakpoints)
        h = StepFunction(bp, a * f(bp[:-1]) + b * g(bp[:-1]))
        lhs, rhs = hardy_I(h, t), a * hardy_I(f, t) + b * hardy_I(g, t)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)

    def test_second_order(self):
        assert hardy_I2(chi(), 0.5) == 0.125
        assert hardy_I2(chi(), 2.0) == 1.5
        assert hardy_I2(ZERO, 3.0) == 0.0

    @given(step_functions(), st.floats(0, 30))
    def test_second_order_is_iterated_first(self, f, t):
        ref, _ = sci.quad(lambda s: hardy_I(f, s), 0, t, points=list(f.breakpoints[f.breakpoints < t]),
                          limit=200, epsabs=1e-13, epsrel=1e-12) if t > 0 else (0.0, 0)
        assert hardy_I2(f, t) == pytest.approx(ref, rel=1e-9, abs=1e-11)

    def test_analytic_input(self):
        assert hardy_I2(EXP, 1.0) == pytest.approx(math.exp(-1), rel=1e-10)


class TestConvolve:
    def test_triangle(self):
        c = convolve(chi(), chi())
        assert c(1.0) == 1.0
        t = np.linspace(0.01, 1.99, 25)
        assert np.allclose([c.exact.star(s) for s in t], 1 - t / 2, atol=1e-14)

    @given(step_functions(max_slabs=6), step_functions(max_slabs=6))
    def test_commutative(self, f, g):
        x = np.linspace(0, f.breakpoints[-1] + g.breakpoints[-1], 41)
        assert np.allclose(convolve(f, g)(x), convolve(g, f)(x), rtol=1e-12, atol=1e-12)

    @given(step_functions(max_slabs=5), step_functions(max_slabs=5))
    def test_mass(self, f, g):
        c = convolve(f, g)
        assert c.exact.integral() == pytest.approx(f.integral() * g.integral(), rel=1e-12, abs=1e-12)

    def test_against_direct_quadrature(self, rng):
        f = StepFunction.from_slabs(rng.uniform(0.2, 1, 4), rng.uniform(0, 1, 4))
        g = StepFunction.from_slabs(rng.uniform(0.2, 1, 3), rng.uniform(0, 1, 3))
        for x in (0.3, 1.1, 2.5):
            pts = sorted(set(f.breakpoints) | set(x - g.breakpoints))
            ref, _ = sci.quad(lambda y: f(y) * g(x - y), 0, x, points=[p for p in pts if 0 < p < x],
                              limit=200)
            assert convolve(f, g)(x) == pytest.approx(ref, rel=1e-9, abs=1e-12)


class TestKernelApply:
    def test_averaging(self):
        assert apply_kernel(AveragingKernel(), chi(), 2.0) == pytest.approx(0.5, rel=1e-12)

    def test_unit_square(self):
        assert apply_kernel(UNIT_SQUARE, chi(), 0.5) == 1.0

    def test_exponential_sum(self):
        K = AnalyticKernel(lambda x, y: np.exp(-(x + y)))
        ref = math.exp(-1) * (1 - math.exp(-1))
        assert apply_kernel(K, chi(), 1.0) == pytest.approx(ref, rel=1e-10)

    def test_hardy_kernel_is_integral(self, rng):
        f = StepFunction.from_slabs(rng.uniform(0.2, 1, 6), rng.uniform(0, 1, 6))
        for x in (0.4, 1.7, 9.0):
            assert apply_kernel(HardyKernel(), f, x) == pytest.approx(hardy_I(f, x), rel=1e-10)

    def test_associate_unit_square(self, rng):
        g = StepFunction.from_slabs(rng.uniform(0.2, 1, 3), rng.uniform(0, 1, 3))
        assert associate_apply(UNIT_SQUARE, g, 0.5) == pytest.approx(g.integral(0, 1), rel=1e-12)
        assert associate_apply(UNIT_SQUARE, g, 1.5) == 0.0

    def test_fubini_on_random_grid(self, rng):
        bp = np.concatenate([[0], np.cumsum(rng.uniform(0.1, 1, 6))])
        K = Grid2DKernel(bp, bp, rng.uniform(0, 1, (6, 6)))
        f = StepFunction.from_slabs(rng.uniform(0.1, 1, 5), rng.uniform(0, 1, 5))
        g = StepFunction.from_slabs(rng.uniform(0.1, 1, 5), rng.uniform(0, 1, 5))
        # double sum oracle on the common refinement
        edges = np.union1d(np.union1d(bp, f.breakpoints), g.breakpoints)
        mid = 0.5 * (edges[:-1] + edges[1:])
        w = np.diff(edges)
        ref = math.fsum((K(mid[:, None], mid[None, :]) * np.outer(g(mid) * w, f(mid) * w)).ravel())
        tg = StepFunction(edges, np.asarray(apply_kernel(K, f, mid)))
        tf = StepFunction(edges, np.asarray(associate_apply(K, g, mid)))
        assert math.fsum(tg.values * g(mid) * w) == pytest.approx(ref, rel=1e-10)
        assert math.fsum(tf.values * f(mid) * w) == pytest.approx(ref, rel=1e-10)

    def test_symmetric_kernel_associate_equals_direct(self, rng):
        bp = np.concatenate([[0], np.cumsum(rng.uniform(0.1, 1, 5))])
        A = rng.uniform(0, 1, (5, 5))
        K = Grid2DKernel(bp, bp, A + A.T)
        f = StepFunction.from_slabs(rng.uniform(0.1, 1, 4), rng.uniform(0, 1, 4))
        x = rng.uniform(0, bp[-1], 10)
        assert np.allclose(apply_kernel(K, f, x), associate_apply(K, f, x), rtol=1e-12)


class TestSTransform:
    def test_averaging_closed_form(self):
        assert s_transform(AveragingKernel(), chi(), 0.5) == pytest.approx(0.5 + 0.5 * math.log(2), rel=1e-9)
        for x in (1.0, 2.0, 7.0):
            assert s_transform(AveragingKernel(), chi(), x) == pytest.approx(1.0, rel=1e-9)

    def test_zero(self):
        assert s_transform(AveragingKernel(), ZERO, 0.5) == 0.0


class TestHardyKernels:
    def test_exponential_sum(self):
        hk = build_hardy_kernels(AnalyticKernel.sum_of(EXP))
        x, y = np.array([0.3, 1.0, 4.0]), np.array([0.5, 2.0, 0.1])
        assert np.allclose(hk.M1(x, y), np.exp(-y) * (1 - np.exp(-x)), rtol=1e-10)
        assert np.allclose(hk.M2(y, x), np.exp(-1 / y) * (1 - np.exp(-1 / x)), rtol=1e-10)

    def test_unit_square_h1(self):
        hk = build_hardy_kernels(UNIT_SQUARE)
        for x in (0.25, 0.8, 1.0, 3.0):
            assert hk.H1(chi(), x) == pytest.approx(min(x, 1.0) ** 2, rel=1e-12)

    def test_rejects_non_monotone(self):
        with pytest.raises(ValueError):
            build_hardy_kernels(Grid2DKernel([0, 1, 2], [0, 1], [[0.0], [1.0]]))


class TestOneilMajorant:
    def test_fixtures(self):
        assert oneil_majorant(chi(), chi(), 1.0)[0] == 1.0
        assert oneil_majorant(chi(), chi(), 0.5)[0] == 0.5
        assert oneil_majorant(ZERO, chi(), 1.0) == (0.0, 0.0)

    @given(step_functions(max_slabs=6), step_functions(max_slabs=6), st.floats(0.05, 10))
    def test_bounds_convolution_star_integral(self, f, g, t):
        lhs = convolve(f, g).exact.star_integral(t)
        rhs, _ = oneil_majorant(f, g, t)
        assert lhs <= rhs + 1e-9 * max(1.0, abs(rhs))


class TestOperatorSpec:
    def test_kinds(self):
        f = chi()
        assert OperatorSpec("identity").apply(f, 0.5) == 1.0
        assert OperatorSpec("zero").apply(f, 0.5) == 0.0
        assert OperatorSpec("hardy_I2").apply(f, 2.0) == 1.5
        assert OperatorSpec("averaging").apply(f, 2.0) == pytest.approx(0.5)
        assert OperatorSpec("convolution", chi()).apply(f, 1.0) == 1.0
        assert OperatorSpec("h1", UNIT_SQUARE).apply(f, 0.5) == pytest.approx(0.25)

    def test_errors(self):
        with pytest.raises(ValueError):
            OperatorSpec("fourier")
        with pytest.raises(ValueError):
            OperatorSpec("kernel")

    def test_image(self):
        img = OperatorSpec("hardy_I").image(chi())
        assert img(np.array([0.5, 2.0])).tolist() == [0.5, 1.0]
