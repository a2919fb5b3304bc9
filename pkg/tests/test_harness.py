import json

import numpy as np
import pytest

from tailsep import separators as sep
from tailsep.distributions import DistributionSpec
from tailsep.errors import InvalidParameters
from tailsep.harness import (PRESETS, ExperimentSpec, classify_k_behavior, mann_kendall,
                             run_rejection_curve, score_path)

W23 = DistributionSpec.parse("weibull:2/3,1")


def _spec(**kw):
    base = dict(distribution=W23, test="scale_free", n=1000, m=20, k_grid=(10, 50),
                separator=sep.weibull_vs_logweibull(1.8), seed=1)
    base.update(kw)
    return ExperimentSpec(**base)


class TestSpec:
    def test_location_scale_free_needs_2k_below_n(self):
        with pytest.raises(InvalidParameters):
            _spec(test="location_scale_free", k_grid=(10, 500))

    def test_m_positive(self):
        with pytest.raises(InvalidParameters):
            _spec(m=0)

    def test_separator_required(self):
        with pytest.raises(InvalidParameters):
            _spec(separator=None)

    def test_default_sides(self):
        assert _spec().side == "right"
        assert _spec(test="hasofer-wang", separator=None).side == "left"
        assert _spec(test="ratio", separator=None).side == "right"

    def test_presets(self):
        assert PRESETS["full"]["n"] == 5000 and PRESETS["full"]["m"] == 1000
        assert PRESETS["full"]["k_grid"][0] == 10 and PRESETS["full"]["k_grid"][-1] == 1000
        assert len(PRESETS["desk"]["k_grid"]) == 100


class TestCurve:
    def test_single_replication_gives_zero_or_one(self):
        c = run_rejection_curve(_spec(m=1))
        assert set(c.rates) <= {0.0, 1.0}

    def test_alpha_one_rejects_everything(self):
        for test in ("scale_free", "location_scale_free", "ratio", "hasofer_wang"):
            s = _spec(test=test, alpha=1.0,
                      separator=sep.weibull_vs_logweibull(3.5) if "scale" in test else None)
            assert np.all(run_rejection_curve(s).rates == 1.0)

    def test_reproducible_bytes(self):
        a = run_rejection_curve(_spec())
        b = run_rejection_curve(_spec())
        assert a.to_csv() == b.to_csv()
        assert a.to_json() == b.to_json()

    def test_workers_do_not_change_result(self):
        assert run_rejection_curve(_spec(), workers=2).to_csv() == run_rejection_curve(_spec()).to_csv()

    def test_stderr_matches_rate(self):
        c = run_rejection_curve(_spec(m=50))
        np.testing.assert_allclose(c.stderr, np.sqrt(c.rates * (1 - c.rates) / 50))
        assert np.all((c.rates >= 0) & (c.rates <= 1))

    def test_errors_are_counted_not_dropped(self):
        # a discrete sample with ties: X_(n-k) == X_(n-2k) breaks the location-scale free statistic
        class Rounded:
            def draw(self, t):
                return np.floor(DistributionSpec.parse("exponential").draw(t) / 100.0)

        s = ExperimentSpec(DistributionSpec.parse("exponential"), "location_scale_free", 1000, 10,
                           (100,), separator=sep.weibull_vs_logweibull(3.5))
        object.__setattr__(s, "distribution", Rounded())
        c = run_rejection_curve(s)
        assert c.n_errors[0] == 10
        assert np.isnan(c.rates[0])

    def test_csv_and_json_layout(self):
        c = run_rejection_curve(_spec())
        lines = c.to_csv().splitlines()
        assert lines[0] == "k,rate,stderr,n_errors"
        assert len(lines) == 3
        doc = json.loads(c.to_json())
        assert doc["spec"]["distribution"]["family"] == "weibull"
        assert doc["k"] == [10, 50]

    def test_baseline_curve_reports_calibration(self):
        c = run_rejection_curve(_spec(test="ratio", separator=None, m=10))
        assert c.calibration["kind"] == "ratio"
        assert c.calibration["m"] >= 1000

    def test_trend_under_heavier_alternative(self):
        # small k keeps the rates away from 1 so the increase with k is visible
        spec = ExperimentSpec(DistributionSpec.parse("gpd:1,1"), "location_scale_free", 1000, 200,
                              tuple(range(2, 41, 2)), separator=sep.weibull_vs_logweibull(3.5),
                              seed=7)
        c = run_rejection_curve(spec)
        tau, p = mann_kendall(c.rates)
        assert tau > 0 and p < 0.05

    def test_null_dominance(self):
        # Pareto(1.5) is C_0-dominated by F0 = Pareto(1): its curve sits at or below the self-curve
        F0 = sep.pareto(1.0)
        ks = (20, 50, 100, 200)
        null = run_rejection_curve(ExperimentSpec(DistributionSpec.parse("pareto:1.5,1"),
                                                  "scale_free", 5000, 300, ks, separator=F0, seed=2))
        self_ = run_rejection_curve(ExperimentSpec(DistributionSpec.parse("pareto:1,1"),
                                                   "scale_free", 5000, 300, ks, separator=F0, seed=3))
        assert np.all(null.rates <= self_.rates + 2 * np.hypot(null.stderr, self_.stderr))
        assert np.all(np.abs(self_.rates - 0.05) <= 3 * np.sqrt(0.05 * 0.95 / 300))


class TestClassifier:
    K = np.arange(10, 301, 10)

    def test_increasing(self):
        b = classify_k_behavior(self.K, self.K / 20.0, 2.0)
        assert b.behavior == "increasing_reject" and b.reject
        assert b.interval[0] == 50

    def test_decreasing(self):
        b = classify_k_behavior(self.K, 1.0 - self.K / 100.0, 1.5)
        assert b.behavior == "decreasing_accept" and not b.reject

    def test_oscillating(self):
        s = np.where(np.arange(self.K.size) % 2 == 0, 1.0, -1.0)
        b = classify_k_behavior(self.K, s, 0.0, alpha=0.05)
        assert b.behavior == "oscillating"
        assert b.exceed_fraction == pytest.approx(0.52)
        assert b.interval == (10, 250)
        assert b.reject

    def test_oscillating_rarely_above_accepts(self):
        s = np.full(self.K.size, -1.0)
        s[::2] = -0.5
        b = classify_k_behavior(self.K, s, 0.0)
        assert b.behavior == "oscillating" and b.exceed_fraction == 0 and not b.reject

    def test_too_few_points(self):
        with pytest.raises(InvalidParameters):
            classify_k_behavior(self.K[:9], self.K[:9], 0.0)


def test_score_path_matches_individual_tests():
    x = DistributionSpec.parse("lognormal").sample(2000, 4)
    F0 = sep.weibull_vs_logweibull(3.5)
    scores, sig = score_path(x, [20, 40], "location_scale_free", F0)
    from tailsep.tail_tests import location_scale_free_test
    assert scores[1] == location_scale_free_test(x, 40, F0).score
    assert np.all(sig == sig[0])
