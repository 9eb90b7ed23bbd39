import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from orlicz_lorentz.funcspace import (AnalyticFunction, AnalyticKernel, Grid2DKernel,
                                      StepFunction)
from orlicz_lorentz.rearrange import (bivariate_rearrangement, decreasing_rearrangement,
                                      distribution, double_star, iterated_rearrangement,
                                      radial_profile)
from conftest import chi, step_functions

EXP = AnalyticFunction(lambda t: np.exp(-t), monotone="decreasing", name="exp")
F3 = StepFunction([0, 1, 2, 2.5], [3.0, 1.0, 5.0])


def oracle_star(f, t):
    """Sort slabs by value and walk the cumulative lengths."""
    order = np.argsort(-f.values, kind="stable")
    edge = 0.0
    for i in order:
        edge += f.lengths[i]
        if t < edge and f.values[i] > 0:
            return f.values[i]
    return 0.0


class TestDistribution:
    def test_fixture(self):
        assert distribution(F3, 2.0) == 1.5
        assert distribution(F3, 5.0) == 0.0
        assert distribution(F3, 0.0) == 2.5

    def test_negative_level_rejected(self):
        with pytest.raises(ValueError):
            distribution(F3, -1.0)


class TestDecreasingRearrangement:
    def test_sorted_slabs(self):
        s = decreasing_rearrangement(F3).star
        assert list(s.breakpoints) == [0.0, 0.5, 1.5, 2.5]
        assert list(s.values) == [5.0, 3.0, 1.0]

    def test_identity_on_nonincreasing(self):
        f = StepFunction([0, 1, 3], [2.0, 1.0])
        s = decreasing_rearrangement(f).star
        assert np.array_equal(s.breakpoints, f.breakpoints)
        assert np.array_equal(s.values, f.values)

    def test_zero(self):
        r = decreasing_rearrangement(StepFunction([0, 1], [0.0]))
        assert r.total_measure == 0.0 and r.star.is_zero()

    @given(step_functions(max_slabs=20))
    def test_star_matches_sort_oracle(self, f):
        s = decreasing_rearrangement(f).star
        probes = np.concatenate([np.linspace(0, f.breakpoints[-1] * 1.1, 37),
                                 s.breakpoints[:-1] + 1e-9])
        for t in probes:
            assert s(t) == oracle_star(f, t)

    @given(step_functions(max_slabs=20))
    def test_equimeasurable_and_nonincreasing(self, f):
        s = decreasing_rearrangement(f).star
        assert s.is_nonincreasing()
        levels = np.unique(np.concatenate([[0.0], f.values]))
        assert np.allclose(distribution(f, levels), distribution(s, levels), rtol=0, atol=1e-12)
        scale = max(1.0, math.fsum(f.values ** 2 * f.lengths))
        assert abs(math.fsum(f.values ** 2 * f.lengths) - math.fsum(s.values ** 2 * s.lengths)) \
            <= 1e-12 * scale


class TestDoubleStar:
    def test_indicator(self):
        assert double_star(chi(), 0.5) == 1.0
        assert double_star(chi(), 2.0) == 0.5

    @given(step_functions(), st.floats(0.01, 30))
    def test_dominates_star(self, f, t):
        s = decreasing_rearrangement(f).star
        assert double_star(f, t) >= s(t) - 1e-12 * max(1.0, s(t))

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            double_star(chi(), 0.0)


class TestRadialProfile:
    def test_line(self):
        assert radial_profile(EXP, 1, 2.0) == pytest.approx(math.exp(-1), rel=1e-14)

    def test_plane(self):
        assert radial_profile(EXP, 2, math.pi) == pytest.approx(math.exp(-1), rel=1e-14)

    def test_ball_indicator(self):
        k = chi()
        vol = 4 * math.pi / 3
        assert radial_profile(k, 3, vol * 0.999) == 1.0
        assert radial_profile(k, 3, vol * 1.001) == 0.0

    @pytest.mark.parametrize("n", [1, 2])
    @pytest.mark.parametrize("profile", ["exp", "indicator"])
    def test_matches_distribution_inversion(self, n, profile):
        k = EXP if profile == "exp" else chi()
        # volume of {|x| < r} in R^n, then invert mu(lam) = vol(k^-1(lam))
        unit = math.pi ** (n / 2) / math.gamma(n / 2 + 1)
        t = np.linspace(0.05, 3.0, 50)
        r = (t / unit) ** (1.0 / n)
        assert np.allclose(radial_profile(k, n, t), k(r), rtol=1e-6, atol=0)

    def test_rejects_increasing_profile(self):
        with pytest.raises(ValueError):
            radial_profile(StepFunction([0, 1, 2], [1.0, 2.0]), 1, 1.0)


class TestIteratedRearrangement:
    def test_monotone_kernel_unchanged(self):
        K = Grid2DKernel([0, 1, 2], [0, 1, 3], [[3.0, 2.0], [1.0, 0.5]], "decreasing", "decreasing")
        L = iterated_rearrangement(K)
        assert np.array_equal(L.values, K.values)

    def test_single_cell_moves_to_origin(self):
        K = Grid2DKernel([0, 1, 2], [0, 1, 2], [[0.0, 0.0], [0.0, 1.0]])
        L = iterated_rearrangement(K)
        assert L(0.5, 0.5) == 1.0
        assert L(1.5, 0.5) == 0.0 and L(0.5, 1.5) == 0.0

    def test_separable(self, rng):
        g = StepFunction.from_slabs(rng.uniform(0.2, 1, 5), rng.uniform(0, 1, 5))
        h = StepFunction.from_slabs(rng.uniform(0.2, 1, 4), rng.uniform(0, 1, 4))
        K = Grid2DKernel(g.breakpoints, h.breakpoints, np.outer(g.values, h.values))
        L = iterated_rearrangement(K)
        gs, hs = decreasing_rearrangement(g).star, decreasing_rearrangement(h).star
        xs = rng.uniform(0, g.breakpoints[-1], 40)
        ys = rng.uniform(0, h.breakpoints[-1], 40)
        assert np.allclose(L(xs, ys), gs(xs) * hs(ys), rtol=1e-12, atol=1e-15)

    @given(st.integers(0, 10_000))
    def test_result_is_monotone_and_preserves_mass(self, seed):
        r = np.random.default_rng(seed)
        bp = np.concatenate([[0], np.cumsum(r.uniform(0.1, 1, 4))])
        K = Grid2DKernel(bp, bp, r.uniform(0, 1, (4, 4)))
        L = iterated_rearrangement(K)
        assert L.is_nonincreasing()
        assert math.fsum((L.values * L.cell_areas).ravel()) == pytest.approx(
            math.fsum((K.values * K.cell_areas).ravel()), rel=1e-12)


class TestBivariate:
    def test_unit_square(self):
        K = Grid2DKernel([0, 1], [0, 1], [[1.0]])
        assert bivariate_rearrangement(K, 0.99) == 1.0
        assert bivariate_rearrangement(K, 1.01) == 0.0

    def test_quarter_disc(self):
        K = AnalyticKernel.radial(AnalyticFunction(lambda s: (s < 1).astype(float),
                                                   monotone="decreasing"))
        assert bivariate_rearrangement(K, math.pi / 4 * 0.999) == 1.0
        assert bivariate_rearrangement(K, math.pi / 4 * 1.001) == 0.0

    def test_sqrt_mode(self):
        K = AnalyticKernel.radial(EXP)
        t = np.array([0.3, 1.0, 4.0])
        assert np.allclose(bivariate_rearrangement(K, t, mode="sqrt"), np.exp(-np.sqrt(t)))
        assert np.allclose(bivariate_rearrangement(K, t), np.exp(-2 * np.sqrt(t / math.pi)))

    def test_general_matches_closed_form(self):
        base = AnalyticKernel.sum_of(EXP)
        K = AnalyticKernel(base.evaluator, "decreasing", "decreasing")
        t = np.array([0.2, 1.0, 3.0])
        assert np.allclose(bivariate_rearrangement(K, t), np.exp(-np.sqrt(2 * t)), rtol=1e-6)
