import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from tailsep import separators as sep
from tailsep.distributions import DistributionSpec, SeedBundle, sample_top
from tailsep.errors import InvalidParameters, SupportError, TiedThresholdError
from tailsep.tail_tests import (SortedSample, compute_hat_R, compute_R, compute_tilde_R,
                                location_scale_free_test, normal_quantile, scale_free_test,
                                sigma2)

PARETO = sep.pareto(1.0)  # F0(x) = 1 - 1/x, u0(t) = t


class TestStatistics:
    def test_R_pareto_hand_value(self):
        expected = math.log(1 / 2) - 0.5 * (math.log(1 / 4) + math.log(1 / 8))
        assert compute_R([2, 4, 8], 2, PARETO) == pytest.approx(expected, rel=1e-12)
        assert compute_R([2, 4, 8], 2, PARETO) == pytest.approx(1.03972, abs=5e-6)

    def test_R_degenerates_to_zero(self):
        assert compute_R([3, 3, 3, 3], 3, PARETO) == 0.0

    def test_R_exponential_is_mean_excess(self):
        x = np.array([0.2, 0.5, 1.1, 1.7, 2.4, 4.0])
        k = 3
        expected = np.mean(x[-k:] - x[-k - 1])
        assert compute_R(x, k, sep.standard_exponential()) == pytest.approx(expected, rel=1e-13)

    def test_tilde_R_pareto_hand_value(self):
        expected = math.log(1 / 2) - 0.5 * (math.log(1 / 4) + math.log(1 / 8))
        assert compute_tilde_R([1, 2, 4, 8], 2, PARETO) == pytest.approx(expected, rel=1e-12)

    def test_tilde_R_threshold_term_vanishes(self):
        # the i = n-k term would contribute ln(k/n) - ln S0(u0(n/k)) = 0
        F0 = sep.weibull_vs_logweibull(1.8)
        n, k = 500, 20
        assert math.log(k / n) - float(F0.logsf(F0.quantile(n / k))) == pytest.approx(0, abs=1e-12)

    def test_hat_R_pareto_hand_value(self):
        s = SortedSample([1, 1.5, 2, 3, 5], n=8)  # X_(4)..X_(8)
        expected = math.log(1 / 4) - 0.5 * (math.log(1 / 6) + math.log(1 / 10))
        assert compute_hat_R(s, 2, PARETO) == pytest.approx(expected, rel=1e-12)
        assert compute_hat_R(s, 2, PARETO) == pytest.approx(0.66088, abs=5e-6)

    def test_hat_R_tied_thresholds(self):
        with pytest.raises(TiedThresholdError):
            compute_hat_R([1, 2, 2, 2, 3, 4], 2, PARETO)

    def test_hat_R_needs_2k_below_n(self):
        with pytest.raises(InvalidParameters):
            compute_hat_R([1, 2, 3, 4], 2, PARETO)

    def test_tilde_R_nonpositive_threshold(self):
        with pytest.raises(SupportError):
            compute_tilde_R([-3, -1, 0, 2, 5], 2, PARETO)

    def test_k_out_of_range(self):
        with pytest.raises(InvalidParameters):
            compute_R([1, 2, 3], 3, PARETO)
        with pytest.raises(InvalidParameters):
            compute_R([1, 2, 3], 0, PARETO)

    def test_external_population(self):
        s = SortedSample([5.0, 6.0, 9.0], n=1000)
        assert s.order_stat(998) == 5.0
        assert s.order_stat(1000) == 9.0
        with pytest.raises(InvalidParameters):
            s.order_stat(997)
        assert compute_tilde_R(s, 2, PARETO) == pytest.approx(
            math.log(2 / 1000) + math.log(500 * 6 / 5) / 2 + math.log(500 * 9 / 5) / 2, rel=1e-12)

    def test_survival_underflow_is_handled_in_log_space(self):
        # far in the tail 1 - F0 underflows but its log does not
        F0 = sep.weibull_vs_logweibull(3.5)
        x = np.exp(np.linspace(50, 400, 30))
        assert np.all(F0.sf(x[-5:]) == 0)
        assert math.isfinite(compute_R(x, 10, F0))


class TestSigma:
    def test_values(self):
        assert sigma2(0) == pytest.approx(1 + 1 / (2 * math.log(2) ** 2), rel=1e-15)
        assert sigma2(0) == pytest.approx(2.04068, abs=5e-6)
        assert sigma2(1) == pytest.approx(1.125, rel=1e-15)

    def test_continuity_at_zero(self):
        assert sigma2(1e-8) == pytest.approx(sigma2(0), abs=1e-6)
        assert sigma2(1e-300) == pytest.approx(sigma2(0), abs=1e-12)

    def test_negative_gamma(self):
        with pytest.raises(InvalidParameters):
            sigma2(-0.1)

    def test_normal_quantile(self):
        assert normal_quantile(0.95) == pytest.approx(1.6448536269514722, abs=1e-10)
        assert normal_quantile(0.5) == 0.0
        assert normal_quantile(0.0) == -math.inf


def _tilde_stub(monkeypatch, value):
    import tailsep.tail_tests as tt
    monkeypatch.setattr(tt, "compute_tilde_R", lambda s, k, F0: value)
    monkeypatch.setattr(tt, "compute_hat_R", lambda s, k, F0: value)


SAMPLE = np.arange(1.0, 1001.0)


class TestDecisions:
    def test_score_zero(self, monkeypatch):
        _tilde_stub(monkeypatch, 1.0)
        for side in ("right", "left"):
            out = scale_free_test(SAMPLE, 100, PARETO, 0.05, side)
            assert out.p_value == 0.5 and not out.reject

    def test_right_side_rejects(self, monkeypatch):
        _tilde_stub(monkeypatch, 1.2)
        out = scale_free_test(SAMPLE, 100, PARETO, 0.05, "right")
        assert out.score == pytest.approx(2.0)
        assert out.reject
        assert out.p_value == pytest.approx(0.02275, abs=5e-6)
        assert out.p_value == pytest.approx(stats.norm.sf(2.0), rel=1e-12)
        assert not scale_free_test(SAMPLE, 100, PARETO, 0.05, "left").reject

    def test_left_side_rule(self, monkeypatch):
        _tilde_stub(monkeypatch, 0.8)
        out = scale_free_test(SAMPLE, 100, PARETO, 0.05, "left")
        assert out.reject
        assert out.p_value == pytest.approx(stats.norm.cdf(-2.0), rel=1e-12)

    def test_location_scale_free_sigma(self, monkeypatch):
        _tilde_stub(monkeypatch, 1.3)
        out = location_scale_free_test(SAMPLE, 100, sep.weibull_vs_logweibull(3.5))
        assert out.sigma == pytest.approx(math.sqrt(2.04068), rel=1e-5)
        assert out.score / out.sigma == pytest.approx(3 / math.sqrt(sigma2(0)), rel=1e-12)
        assert out.score / out.sigma == pytest.approx(2.10004, abs=1e-4)
        assert out.reject
        out1 = location_scale_free_test(SAMPLE, 100, PARETO)
        assert out1.sigma == pytest.approx(math.sqrt(1.125), rel=1e-14)

    def test_location_scale_free_null_p(self, monkeypatch):
        _tilde_stub(monkeypatch, 1.0)
        for k in (10, 100, 400):
            assert location_scale_free_test(SAMPLE, k, PARETO).p_value == 0.5

    def test_alpha_bounds(self, monkeypatch):
        _tilde_stub(monkeypatch, 1.0)
        with pytest.raises(InvalidParameters):
            scale_free_test(SAMPLE, 10, PARETO, 0.0)
        assert scale_free_test(SAMPLE, 10, PARETO, 1.0).reject

    @given(st.floats(-3, 3), st.floats(1e-6, 3))
    def test_p_value_decreasing_in_statistic(self, lo, gap):
        import tailsep.tail_tests as tt
        hi = lo + gap
        plo = tt._decide("x", 1 + lo / 10, 100, 1000, 1.3, 0.05, "right").p_value
        phi = tt._decide("x", 1 + hi / 10, 100, 1000, 1.3, 0.05, "right").p_value
        assert phi < plo or (phi == plo == 0.0)

    @given(st.floats(-5, 5), st.sampled_from(["left", "right"]), st.floats(0.001, 0.5))
    def test_reject_iff_score_beyond_threshold(self, stat, side, alpha):
        import tailsep.tail_tests as tt
        out = tt._decide("x", 1 + stat / 10, 100, 1000, 1.4, alpha, side)
        u = stats.norm.ppf(1 - alpha if side == "right" else alpha)
        expect = out.score > 1.4 * u if side == "right" else out.score < 1.4 * u
        assert out.reject == expect


def _lognormal(n, seed):
    return DistributionSpec.parse("lognormal:0,1").sample(n, seed)


class TestInvariance:
    @given(st.integers(0, 10_000), st.sampled_from([1e-6, 1e-3, 0.5, 7.0, 1e3, 1e6]),
           st.integers(5, 100))
    def test_tilde_R_scale_invariant(self, seed, c, k):
        F0 = sep.weibull_vs_logweibull(1.8)
        x = _lognormal(500, seed)
        a, b = compute_tilde_R(x, k, F0), compute_tilde_R(c * x, k, F0)
        assert abs(a - b) <= 1e-10 * max(1.0, abs(a))

    @given(st.integers(0, 10_000), st.sampled_from([0.1, 3.0, 100.0]),
           st.sampled_from([-50.0, 0.0, 7.0]), st.integers(5, 100))
    def test_hat_R_affine_invariant(self, seed, a, b, k):
        F0 = sep.weibull_vs_logweibull(3.5)
        x = _lognormal(500, seed)
        assert compute_hat_R(a * x + b, k, F0) == pytest.approx(compute_hat_R(x, k, F0), abs=1e-9)

    def test_hat_R_example_shift(self):
        F0 = sep.weibull_vs_logweibull(3.5)
        x = _lognormal(300, 9)
        assert compute_hat_R(3 * x - 11, 40, F0) == pytest.approx(compute_hat_R(x, 40, F0), abs=1e-9)


@pytest.mark.slow
def test_pareto_self_test_is_mean_of_exponentials():
    # with F0 = F = Pareto(1), tilde R is the mean of k i.i.d. Exp(1)
    k, n = 50, 2000
    d = DistributionSpec.parse("pareto:1,1")
    vals = np.array([compute_tilde_R(SortedSample(sample_top(d, n, k + 1, SeedBundle(4, r)), n=n,
                                                  assume_sorted=True), k, PARETO)
                     for r in range(3000)])
    assert abs(vals.mean() - 1) < 4 / math.sqrt(k * 3000)
    assert vals.var() == pytest.approx(1 / k, rel=0.1)
    assert stats.kstest(vals * k, stats.gamma(k).cdf).statistic < 0.03
