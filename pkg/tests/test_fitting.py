import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from tailsep.distributions import DistributionSpec
from tailsep.errors import InvalidParameters
from tailsep.fitting import exceedances, fit_exponential, fit_gpd, fit_weibull, qq_table


def test_exponential_rate_is_inverse_mean():
    x = np.array([0.51, 1.2, 2.82])  # mean 1.51
    fit = fit_exponential(x)
    assert fit.params["rate"] == pytest.approx(1 / 1.51, rel=1e-14)
    assert fit.loglik == pytest.approx(3 * math.log(1 / 1.51) - 3, rel=1e-14)


def test_weibull_fixed_shape_one_equals_exponential():
    x = DistributionSpec.parse("weibull:1.21,1").sample(5000, 1)
    w, e = fit_weibull(x, shape=1.0), fit_exponential(x)
    assert w.params["lam"] == e.params["rate"]
    assert w.loglik == e.loglik


def test_weibull_recovers_shape():
    x = DistributionSpec.parse("weibull:1.21,1").sample(10_000, 2)
    fit = fit_weibull(x)
    assert abs(fit.params["alpha"] - 1.21) < 0.05


def test_weibull_matches_scipy():
    x = DistributionSpec.parse("weibull:0.7,2").sample(3000, 3)
    fit = fit_weibull(x)
    c, _, scale = stats.weibull_min.fit(x, floc=0)
    assert fit.params["alpha"] == pytest.approx(c, rel=1e-4)
    # F = 1 - exp(-lam x^alpha) means lam = scale^-alpha
    assert fit.params["lam"] == pytest.approx(scale ** -c, rel=1e-3)


def test_weibull_score_is_zero_at_optimum():
    x = DistributionSpec.parse("weibull:2.5,1").sample(2000, 5)
    a = fit_weibull(x).params["alpha"]
    lx = np.log(x)
    w = x ** a / np.sum(x ** a)
    assert 1 / a + lx.mean() - np.dot(w, lx) == pytest.approx(0, abs=1e-10)


def test_gpd_recovers_shape():
    x = DistributionSpec.parse("gpd:0.5,1").sample(10_000, 4)
    fit = fit_gpd(x)
    assert abs(fit.params["gamma"] - 0.5) < 0.05


def test_gpd_matches_scipy():
    x = DistributionSpec.parse("gpd:0.3,2").sample(3000, 6)
    fit = fit_gpd(x)
    c, _, scale = stats.genpareto.fit(x, floc=0)
    assert fit.params["gamma"] == pytest.approx(c, abs=2e-3)
    assert fit.params["sigma"] == pytest.approx(scale, rel=2e-3)
    assert fit.loglik >= stats.genpareto.logpdf(x, c, 0, scale).sum() - 1e-6


def test_gpd_shape_respects_bounds():
    x = DistributionSpec.parse("weibull:3,1").sample(2000, 1)  # light tail, gamma < 0
    g = fit_gpd(x).params["gamma"]
    assert -0.5 <= g <= 5


@given(st.integers(0, 1000))
def test_fits_ignore_input_order(seed):
    x = DistributionSpec.parse("gpd:0.2,1").sample(200, seed)
    perm = np.random.default_rng(seed).permutation(x)
    for fit in (fit_exponential, fit_weibull, fit_gpd):
        assert fit(x).params == fit(perm).params


def test_empty_and_invalid():
    with pytest.raises(InvalidParameters):
        fit_exponential([])
    with pytest.raises(InvalidParameters):
        fit_weibull([1.0, -2.0])
    with pytest.raises(InvalidParameters):
        exceedances([1.0, 2.0], 5.0)


def test_exceedances():
    np.testing.assert_array_equal(exceedances([109.0, 110.5, 112.0], 110.0), [0.5, 2.0])


def test_qq_table():
    x = DistributionSpec.parse("exponential").sample(20_000, 8)
    t = qq_table(x)
    assert all(len(col) == x.size for col in t.values())
    assert np.all(np.diff(t["weibull2"]) > 0)
    assert np.all(np.diff(t["gpd"]) > 0)
    # self Q-Q of exponential data: empirical column tracks the x column
    mid = slice(100, 19_000)
    np.testing.assert_allclose(t["empirical"][mid], t["exp_quantile"][mid], atol=0.1)
    n = x.size
    assert t["exp_quantile"][0] == pytest.approx(-math.log1p(-1 / (n + 1)))
