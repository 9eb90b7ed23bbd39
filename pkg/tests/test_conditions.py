import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from orlicz_lorentz.conditions import (ConditionReport, PowerParams, WeightedSetup, check_growth,
                                       check_power_conditions, check_theorem10, check_theorem12,
                                       check_theorem2, check_theorem4_orlicz, check_theorem7,
                                       composition_is_convex, kantorovich_probe, random_triples,
                                       refine_grid)
from orlicz_lorentz.funcspace import (AnalyticFunction, AnalyticKernel, Grid2DKernel, HardyKernel,
                                      StepFunction)
from orlicz_lorentz.harness.descriptors import kantorovich_kernel
from orlicz_lorentz.operators import build_hardy_kernels
from orlicz_lorentz.orlicz import PowerN, Weight, exp_minus_one
from conftest import chi

SQ = PowerN(2.0)
ONE = Weight.constant(1.0)
INV = Weight(AnalyticFunction(lambda x: 1.0 / np.asarray(x), monotone="decreasing", name="1/x"),
             None, "infinite")
EXP = AnalyticFunction(lambda t: np.exp(-t), monotone="decreasing",
                       primitive=lambda t: -np.expm1(-np.asarray(t, dtype=float)), name="exp")
INV_SQRT = AnalyticFunction(lambda t: np.asarray(t) ** -0.5, monotone="decreasing",
                            primitive=lambda t: 2 * np.sqrt(t), name="t^-1/2")
LAM = np.logspace(-2, 2, 5)
XS = np.logspace(-2, 2, 9)


class TestParams:
    @given(st.floats(1.01, 10), st.floats(0, 10))
    def test_conjugates(self, p, extra):
        pp = PowerParams(p, p + extra)
        assert abs(1 / pp.p + 1 / pp.p_prime - 1) <= 1e-14
        assert abs(1 / pp.q + 1 / pp.q_prime - 1) <= 1e-14

    def test_order_enforced(self):
        with pytest.raises(ValueError):
            PowerParams(3.0, 2.0)
        with pytest.raises(ValueError):
            PowerParams(1.0, 2.0)

    def test_refined_grid_is_superset(self):
        g = np.logspace(-1, 1, 5)
        r = refine_grid(g)
        assert set(g).issubset(set(r)) and r[0] < g[0] and r[-1] > g[-1]


class TestReport:
    def test_violation_needs_witness(self):
        with pytest.raises(ValueError):
            ConditionReport("x", "violated_witness", math.inf)
        with pytest.raises(ValueError):
            ConditionReport("x", "fine", 1.0)


class TestGrowth:
    def test_sum_kernel_random_profile(self, rng):
        k = StepFunction.from_slabs(rng.uniform(0.1, 2, 8), np.sort(rng.uniform(0, 1, 8))[::-1])
        prof = AnalyticFunction(k, monotone="decreasing", primitive=k.cumulative,
                                kinks=tuple(k.breakpoints[1:]))
        hk = build_hardy_kernels(AnalyticKernel.sum_of(prof))
        tr = random_triples(rng, 1000)
        assert check_growth(hk.M1, tr).holds
        assert check_growth(hk.M2, tr).holds

    def test_square_difference_violates(self):
        rep = check_growth(AnalyticKernel(lambda x, y: (x - y) ** 2), [(1.0, 2.0, 3.0)])
        assert rep.verdict == "violated_witness"
        w = rep.witnesses[0]
        assert w["triple"] == [1.0, 2.0, 3.0] and w["lhs"] == 4.0 and w["rhs"] == 2.0

    def test_hardy_kernel(self, rng):
        assert check_growth(HardyKernel(), random_triples(rng, 500)).holds

    def test_bad_triples(self):
        with pytest.raises(ValueError):
            check_growth(HardyKernel(), [(2.0, 1.0, 3.0)])


class TestTheorem2:
    def setup_for(self, w):
        return WeightedSetup(SQ, SQ, w, ONE, ONE, ONE, HardyKernel())

    def test_hardy_holds(self):
        rep = check_theorem2(self.setup_for(INV), LAM, XS)
        assert rep.verdict == "holds_estimated"
        assert rep.best_constant == pytest.approx(0.5, rel=1e-6)

    def test_divergent_tail(self):
        rep = check_theorem2(self.setup_for(ONE), LAM, XS, refine=False)
        assert rep.verdict == "divergent_term"

    def test_lambda_scaling(self):
        a = check_theorem2(self.setup_for(INV), LAM, XS, refine=False)
        b = check_theorem2(self.setup_for(INV), 2 * LAM, XS, refine=False)
        assert a.verdict == b.verdict
        assert a.best_constant == pytest.approx(b.best_constant, rel=1e-9)

    def test_convexity_precheck(self):
        assert not composition_is_convex(SQ, PowerN(3.0))
        with pytest.raises(ValueError):
            check_theorem2(WeightedSetup(SQ, PowerN(3.0), INV, ONE, ONE, ONE, HardyKernel()), LAM, XS)


class TestTheorem4:
    def test_zero_profile(self):
        rep = check_theorem4_orlicz(StepFunction([0, 1], [0.0]), SQ, SQ, LAM, XS)
        assert rep.holds

    def test_indicator(self):
        # the (v) constant creeps up as x -> 0, so use the full default x range
        rep = check_theorem4_orlicz(chi(), SQ, SQ, LAM)
        assert rep.sub("v").holds and math.isfinite(rep.sub("v").best_constant)
        assert rep.sub("vi").holds
        assert rep.sub("vii").verdict == "divergent_term"

    def test_matches_power_conditions(self):
        orl = check_theorem4_orlicz(chi(), SQ, SQ, LAM, only=["v", "vii"])
        pw = check_power_conditions(chi(), PowerParams(2.0, 2.0), only=["v_prime", "vii_prime"])
        assert orl.sub("v").verdict == pw.sub("v_prime").verdict
        assert orl.sub("vii").verdict == pw.sub("vii_prime").verdict


class TestPowerConditions:
    def test_hls_constant(self):
        rep = check_power_conditions(INV_SQRT, PowerParams(4 / 3, 4.0), only=["v_prime"])
        first = rep.sub("v_prime_1")
        assert first.holds
        assert first.best_constant == pytest.approx(16 / 15, rel=1e-6)

    def test_zero(self):
        assert check_power_conditions(StepFunction([0, 1], [0.0]), PowerParams(2, 2), XS).holds

    def test_vii_divergent(self):
        rep = check_power_conditions(INV_SQRT, PowerParams(2.0, 2.0), XS, only=["vii_prime"])
        assert rep.verdict == "divergent_term"

    def test_missing_r_skips_with_note(self):
        rep = check_power_conditions(chi(), PowerParams(2.0, 2.0), XS)
        assert rep.sub("vi_prime") is None
        assert any("r" in n for n in rep.notes)


class TestTheorem7:
    def test_square_holds(self):
        rep = check_theorem7(SQ, ONE, LAM, XS)
        assert rep.holds
        assert rep.best_constant == pytest.approx(0.5, rel=1e-6)

    def test_finite_mass_rejected(self):
        with pytest.raises(ValueError, match="infinite total mass"):
            check_theorem7(SQ, Weight(chi()), LAM, XS)

    def test_lambda_scaling(self):
        a = check_theorem7(SQ, ONE, LAM, XS, refine=False)
        b = check_theorem7(SQ, ONE, 2 * LAM, XS, refine=False)
        assert a.verdict == b.verdict
        assert a.best_constant == pytest.approx(b.best_constant, rel=1e-9)

    def test_nonpower_runs(self):
        rep = check_theorem7(exp_minus_one(), ONE, np.logspace(-1, 1, 3), np.logspace(-1, 1, 3),
                             refine=False)
        assert rep.verdict in ("holds_estimated", "divergent_term", "inconclusive_growth")


class TestTheorem10And12:
    def test_zero_kernel(self):
        Z = Grid2DKernel([0, 1], [0, 1], [[0.0]], "decreasing", "decreasing")
        assert check_theorem10(Z, SQ, SQ, ONE, ONE, LAM, XS).holds
        assert check_theorem12(Z, PowerParams(2, 2), ONE, ONE, XS).holds

    def test_exponential_sum(self):
        L = AnalyticKernel.sum_of(EXP)
        r10 = check_theorem10(L, SQ, SQ, ONE, ONE, LAM, XS)
        r12 = check_theorem12(L, PowerParams(2, 2), ONE, ONE, XS)
        h1 = r10.sub("h1_alpha")
        assert h1.holds and math.isfinite(h1.best_constant)
        for cid in ("h1_alpha", "h1_beta", "h2_alpha", "h2_beta"):
            assert r10.sub(cid).verdict == r12.sub(cid).verdict

    def test_theorem12_first_condition_closed_form(self):
        L = AnalyticKernel.sum_of(EXP)
        rep = check_theorem12(L, PowerParams(2, 2), ONE, ONE, XS, refine=False).sub("h1_alpha")
        x = XS
        ratio = (1 - np.exp(-x)) ** 2 * (1 - np.exp(-2 * x)) / 2 / x
        assert rep.best_constant == pytest.approx(ratio.max(), rel=1e-6)

    def test_vanishing_initial_mass_flagged(self):
        u2 = Weight(AnalyticFunction(lambda x: (np.asarray(x) >= 1).astype(float), kinks=(1.0,)),
                    lambda x: np.maximum(np.asarray(x, dtype=float) - 1, 0.0), "infinite")
        rep = check_theorem12(AnalyticKernel.sum_of(EXP), PowerParams(2, 2), ONE, u2, XS,
                              refine=False)
        assert rep.sub("h1_alpha").verdict == "divergent_term"


class TestKantorovich:
    def test_divergent(self):
        rep = kantorovich_probe(kantorovich_kernel(), PowerParams(2, 2))
        assert rep.verdict == "divergent_term"
        d = rep.details
        assert np.allclose(np.asarray(d["inner_norms"]) * np.asarray(rep.grid["x"]), 1.0, rtol=1e-8)
        assert d["slope"] == pytest.approx(-1.0, abs=1e-6)
        assert all(1.8 <= r <= 2.2 for r in d["growth_ratios"])

    def test_unit_square_finite(self):
        rep = kantorovich_probe(Grid2DKernel([0, 1], [0, 1], [[1.0]], "decreasing", "decreasing"),
                                PowerParams(2, 2))
        assert rep.holds and rep.best_constant == pytest.approx(1.0, rel=1e-6)

    def test_bad_eps(self):
        with pytest.raises(ValueError):
            kantorovich_probe(kantorovich_kernel(), PowerParams(2, 2), eps_sequence=[0.1, 0.2, 0.05])
