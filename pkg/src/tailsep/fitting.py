"""Maximum likelihood fits of exponential, two-parameter Weibull and GPD tails."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import optimize, special

from .errors import ConvergenceError, InvalidParameters

__all__ = ["FitResult", "fit_exponential", "fit_weibull", "fit_gpd", "fit_all",
           "exceedances", "qq_table", "GPD_GAMMA_BOUNDS"]

GPD_GAMMA_BOUNDS = (-0.5, 5.0)


@dataclass
class FitResult:
    model: str  # Exponential, Weibull2 or GPD
    params: dict
    loglik: float
    n: int
    iterations: int = 0
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def quantile(self, p):
        """Fitted quantile at probability ``p``."""
        p = np.asarray(p, dtype=float)
        e = -np.log1p(-p)
        if self.model == "Exponential":
            return e / self.params["rate"]
        if self.model == "Weibull2":
            return (e / self.params["lam"]) ** (1.0 / self.params["alpha"])
        g, s = self.params["gamma"], self.params["sigma"]
        if g == 0:
            return s * e
        return s * np.expm1(g * e) / g


def _positive(x):
    # sorted so that every fit is exactly invariant to input order
    x = np.sort(np.asarray(x, dtype=float).ravel())
    if x.size == 0:
        raise InvalidParameters("cannot fit an empty sample")
    if np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise InvalidParameters("fits need finite, strictly positive observations")
    return x


def fit_exponential(x) -> FitResult:
    """Rate = 1/mean."""
    x = _positive(x)
    n = x.size
    rate = n / math.fsum(x)
    log_rate = math.log(rate)
    return FitResult("Exponential", {"rate": math.exp(log_rate)}, n * log_rate - n, n)


def _weibull_profile(alpha, logx, n):
    """log(lambda) and log-likelihood with lambda profiled out."""
    a = alpha * logx
    if a.max() < 700:
        log_lam = math.log(n / math.fsum(np.exp(a)))
    else:
        log_lam = math.log(n) - float(special.logsumexp(a))
    ll = n * math.log(alpha) + n * log_lam + (alpha - 1.0) * math.fsum(logx) - n
    return log_lam, float(ll)


def _weibull_score(alpha, logx):
    """Profile score g(alpha) and its derivative; g decreases in alpha."""
    a = alpha * logx
    w = np.exp(a - a.max())
    w /= w.sum()
    m1 = float(np.dot(w, logx))
    m2 = float(np.dot(w, logx * logx))
    g = 1.0 / alpha + logx.mean() - m1
    dg = -1.0 / alpha ** 2 - (m2 - m1 * m1)
    return g, dg


def fit_weibull(x, shape: float | None = None, tol: float = 1e-12, max_iter: int = 200) -> FitResult:
    """Weibull W(alpha, lam), F(x) = 1 - exp(-lam x^alpha).

    The shape solves the profile score equation by Newton steps kept inside a
    sign-change bracket (bisection when a step leaves it); lam = n / sum x^alpha.
    With ``shape`` given only lam is estimated.
    """
    x = _positive(x)
    n = x.size
    logx = np.log(x)
    if shape is not None:
        if not shape > 0:
            raise InvalidParameters(f"shape must be positive, got {shape}")
        log_lam, ll = _weibull_profile(float(shape), logx, n)
        return FitResult("Weibull2", {"alpha": float(shape), "lam": math.exp(log_lam)}, ll, n)
    if np.ptp(logx) == 0:
        raise InvalidParameters("Weibull fit needs at least two distinct values")

    lo, hi = 1.0, 1.0
    it = 0
    while _weibull_score(lo, logx)[0] <= 0:
        lo /= 2.0
        it += 1
        if it > 200:
            raise ConvergenceError("could not bracket the Weibull shape", (lo, hi), it)
    while _weibull_score(hi, logx)[0] >= 0:
        hi *= 2.0
        it += 1
        if it > 200:
            raise ConvergenceError("could not bracket the Weibull shape", (lo, hi), it)

    a = 0.5 * (lo + hi)
    for it in range(1, max_iter + 1):
        g, dg = _weibull_score(a, logx)
        if g > 0:
            lo = a
        else:
            hi = a
        step = a - g / dg if dg < 0 else 0.5 * (lo + hi)
        new = step if lo < step < hi else 0.5 * (lo + hi)
        if abs(new - a) <= tol * max(1.0, a) or hi - lo <= tol * max(1.0, a):
            a = new
            break
        a = new
    else:
        raise ConvergenceError("Weibull shape did not converge", (lo, hi), max_iter)
    log_lam, ll = _weibull_profile(a, logx, n)
    return FitResult("Weibull2", {"alpha": float(a), "lam": math.exp(log_lam)}, ll, n, it)


def _gpd_loglik(gamma, log_sigma, x):
    sigma = math.exp(log_sigma)
    z = x / sigma
    n = x.size
    if abs(gamma) < 1e-10:
        return -n * log_sigma - float(z.sum())
    t = gamma * z
    if np.any(t <= -1.0):
        return -np.inf
    return -n * log_sigma - (1.0 + 1.0 / gamma) * float(np.log1p(t).sum())


def _gpd_profile(gamma, x, log_mean, xmax):
    lo, hi = log_mean - 20.0, log_mean + 20.0
    if gamma < 0:
        lo = max(lo, math.log(-gamma * xmax) + 1e-9)
    res = optimize.minimize_scalar(lambda ls: -_gpd_loglik(gamma, ls, x), bounds=(lo, hi),
                                   method="bounded", options={"xatol": 1e-10, "maxiter": 500})
    if not res.success:
        raise ConvergenceError(f"GPD scale did not converge at gamma={gamma:g}", (lo, hi), res.nfev)
    return res.x, -res.fun, res.nfev


def fit_gpd(x, gamma_bounds=GPD_GAMMA_BOUNDS) -> FitResult:
    """GPD(gamma, sigma), F(x) = 1 - (1 + gamma x / sigma)^(-1/gamma), x > 0.

    Profile likelihood in gamma over ``gamma_bounds`` with the scale
    maximised in log(sigma) for each gamma.
    """
    x = _positive(x)
    n = x.size
    log_mean = math.log(x.mean())
    xmax = float(x.max())
    g_lo, g_hi = gamma_bounds
    res = optimize.minimize_scalar(lambda g: -_gpd_profile(g, x, log_mean, xmax)[1],
                                   bounds=(g_lo, g_hi), method="bounded",
                                   options={"xatol": 1e-8, "maxiter": 500})
    if not res.success or not np.isfinite(res.fun):
        raise ConvergenceError("GPD shape did not converge", (g_lo, g_hi), res.nfev)
    gamma = float(res.x)
    log_sigma, ll, _ = _gpd_profile(gamma, x, log_mean, xmax)
    return FitResult("GPD", {"gamma": gamma, "sigma": math.exp(float(log_sigma))}, float(ll), n,
                     int(res.nfev))


def fit_all(x) -> dict:
    return {"Exponential": fit_exponential(x), "Weibull2": fit_weibull(x), "GPD": fit_gpd(x)}


def exceedances(x, threshold: float | None) -> np.ndarray:
    """Values above ``threshold`` shifted by it; the raw values when threshold is None."""
    x = np.asarray(x, dtype=float).ravel()
    if threshold is None:
        return x
    out = x[x > threshold] - threshold
    if out.size == 0:
        raise InvalidParameters(f"no observations exceed the threshold {threshold}")
    return out


def qq_table(x, fits: dict | None = None) -> dict:
    """Columns for a Q-Q plot against standard exponential quantiles.

    Plotting positions are i/(n+1).  Returns ``exp_quantile``, ``empirical``
    and one fitted-quantile column per model in ``fits`` (GPD and Weibull2
    by default).
    """
    y = np.sort(_positive(x))
    n = y.size
    p = np.arange(1, n + 1) / (n + 1.0)
    if fits is None:
        fits = {"GPD": fit_gpd(y), "Weibull2": fit_weibull(y)}
    table = {"exp_quantile": -np.log1p(-p), "empirical": y}
    for name, fit in fits.items():
        table[name.lower()] = fit.quantile(p)
    return table
