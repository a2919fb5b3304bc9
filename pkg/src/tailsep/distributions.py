"""Distribution families used by the simulation study.

Each family is described by two functions: the log-survival function
``log(1 - F(x))`` and the tail quantile function ``u(t) = F^{-1}(1 - 1/t)``
for ``t > 1``.  Working with these two (rather than cdf/ppf) keeps the far
tail accurate, which is the only part of the distribution the tests look at.

Sampling is inverse transform on a seeded uniform stream: a uniform survival
level ``s`` becomes the draw ``u(1/s)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import special

from .errors import ConvergenceError, InvalidParameters, SupportError

__all__ = [
    "DistributionSpec",
    "SeedBundle",
    "FAMILIES",
    "cdf",
    "sf",
    "logsf",
    "quantile",
    "sample",
    "sample_top",
    "sample_from_quantile",
    "invert_logsf",
]


@dataclass(frozen=True)
class SeedBundle:
    """A (seed, stream) pair naming one reproducible uniform stream.

    Streams with the same seed and different ids are statistically
    independent (they are distinct children of one ``SeedSequence``).
    """

    seed: int
    stream: int = 0

    def __post_init__(self):
        if self.seed < 0 or self.stream < 0:
            raise InvalidParameters("seed and stream must be non-negative integers")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream),))
        return np.random.Generator(np.random.PCG64(ss))


def _as_bundle(seed) -> SeedBundle:
    if isinstance(seed, SeedBundle):
        return seed
    return SeedBundle(int(seed))


# ---------------------------------------------------------------------------
# numerical inversion
# ---------------------------------------------------------------------------

def invert_logsf(logsf_fn, log_t, lower, max_expand=1100, max_iter=2000):
    """Solve ``logsf_fn(x) = -log_t`` elementwise by bracketed bisection.

    ``lower`` must be a point where ``logsf_fn`` is at or above every target
    (typically the left edge of the support).  The upper end of the bracket
    is found by geometric expansion.
    """
    target = -np.atleast_1d(np.asarray(log_t, dtype=float))
    lo = np.full(target.shape, float(lower))
    width = np.ones_like(lo)
    hi = lo + width
    for _ in range(max_expand):
        above = logsf_fn(hi) > target
        if not above.any():
            break
        width = np.where(above, 2.0 * width, width)
        lo = np.where(above, hi, lo)
        hi = np.where(above, lo + width, hi)
    else:
        raise ConvergenceError(
            "could not bracket the quantile", bracket=(float(lo.min()), float(hi.max())),
            iterations=max_expand)
    for it in range(max_iter):
        mid = 0.5 * (lo + hi)
        done = (mid <= lo) | (mid >= hi)
        if done.all():
            return hi
        go_right = logsf_fn(mid) > target
        lo = np.where(go_right & ~done, mid, lo)
        hi = np.where(~go_right & ~done, mid, hi)
    raise ConvergenceError(
        "bisection did not converge", bracket=(float(lo.min()), float(hi.max())),
        iterations=max_iter)


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------

class _Family:
    name = ""
    params: tuple = ()
    closed_form = True

    def check(self, p):
        if any(not math.isfinite(v) for v in p):
            raise InvalidParameters(f"{self.name}: parameters must be finite, got {p}")

    def lower(self, *p):
        return -np.inf

    def logsf(self, x, *p):
        raise NotImplementedError

    def quantile(self, t, *p):
        raise NotImplementedError

    def draw(self, t, *p):
        return self.quantile(t, *p)

    def _positive(self, p, names):
        for v, nm in zip(p, names):
            if not v > 0:
                raise InvalidParameters(f"{self.name}: {nm} must be > 0, got {v}")


class _Weibull(_Family):
    name = "weibull"
    params = ("alpha", "lam")

    def check(self, p):
        super().check(p)
        self._positive(p, self.params)

    def lower(self, alpha, lam):
        return 0.0

    def logsf(self, x, alpha, lam):
        xp = np.maximum(x, 0.0)
        return -lam * xp ** alpha

    def quantile(self, t, alpha, lam):
        return (np.log(t) / lam) ** (1.0 / alpha)


class _Normal(_Family):
    name = "normal"
    params = ("mu", "sigma")
    closed_form = False

    def check(self, p):
        super().check(p)
        self._positive(p[1:], ("sigma",))

    def logsf(self, x, mu, sigma):
        return special.log_ndtr(-(x - mu) / sigma)

    def quantile(self, t, mu, sigma):
        return mu - sigma * special.ndtri(1.0 / t)


class _Gamma(_Family):
    # rate parametrisation: density lam^a x^(a-1) e^(-lam x) / Gamma(a)
    name = "gamma"
    params = ("alpha", "lam")
    closed_form = False

    def check(self, p):
        super().check(p)
        self._positive(p, self.params)

    def lower(self, alpha, lam):
        return 0.0

    def logsf(self, x, alpha, lam):
        z = lam * np.maximum(x, 0.0)
        with np.errstate(divide="ignore"):
            out = np.log(special.gammaincc(alpha, z))
        tiny = ~np.isfinite(out)
        if np.any(tiny):
            # large-z asymptotic series of the upper incomplete gamma function
            zt = np.where(tiny, z, 1.0)
            a1 = alpha - 1.0
            series = 1.0 + a1 / zt + a1 * (a1 - 1.0) / zt ** 2
            asym = a1 * np.log(zt) - zt + np.log(series) - special.gammaln(alpha)
            out = np.where(tiny, asym, out)
        return out

    def quantile(self, t, alpha, lam):
        return special.gammainccinv(alpha, 1.0 / t) / lam


class _ModifiedWeibull(_Family):
    """Law of Y = X ln X with X ~ Weibull(alpha, c)."""

    name = "modified_weibull"
    params = ("alpha", "c")

    def check(self, p):
        super().check(p)
        self._positive(p, self.params)

    def lower(self, alpha, c):
        return -1.0 / math.e

    def logsf(self, y, alpha, c):
        y = np.asarray(y, dtype=float)
        inside = y > -1.0 / math.e
        ys = np.where(inside, y, 0.0)
        x_up = np.exp(special.lambertw(ys, 0).real)
        log_up = -c * x_up ** alpha
        neg = inside & (y < 0)
        yn = np.where(neg, y, -0.1)
        x_lo = np.exp(special.lambertw(yn, -1).real)
        with np.errstate(divide="ignore"):
            log_two = np.log(np.exp(log_up) - np.expm1(-c * x_lo ** alpha))
        out = np.where(neg, log_two, log_up)
        return np.where(inside, out, 0.0)

    def quantile(self, t, alpha, c):
        shape = np.shape(t)
        t = np.atleast_1d(np.asarray(t, dtype=float))
        log_t = np.log(t)
        closed = log_t >= c  # the upper branch X >= 1 gives Y >= 0
        out = np.empty(t.shape)
        if np.any(closed):
            out[closed] = self.draw(t[closed], alpha, c)
        if np.any(~closed):
            out[~closed] = invert_logsf(lambda y: self.logsf(y, alpha, c),
                                        log_t[~closed], self.lower(alpha, c))
        return out.reshape(shape)

    def draw(self, t, alpha, c):
        x = (np.log(t) / c) ** (1.0 / alpha)
        return x * np.log(x)


class _ExtendedWeibull(_Family):
    """Survival r(x) exp(-x^alpha) with r(x) = 1/(x + 1)."""

    name = "extended_weibull"
    params = ("alpha",)
    closed_form = False

    def check(self, p):
        super().check(p)
        self._positive(p, self.params)

    def lower(self, alpha):
        return 0.0

    def logsf(self, x, alpha):
        xp = np.maximum(x, 0.0)
        return -xp ** alpha - np.log1p(xp)

    def quantile(self, t, alpha):
        t = np.asarray(t, dtype=float)
        out = invert_logsf(lambda x: self.logsf(x, alpha), np.log(t), 0.0)
        return out.reshape(t.shape)


class _LogNormal(_Family):
    name = "lognormal"
    params = ("mu", "sigma")

    def check(self, p):
        super().check(p)
        self._positive(p[1:], ("sigma",))

    def lower(self, mu, sigma):
        return 0.0

    def logsf(self, x, mu, sigma):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            lx = np.log(np.where(x > 0, x, 1.0))
        return np.where(x > 0, special.log_ndtr(-(lx - mu) / sigma), 0.0)

    def quantile(self, t, mu, sigma):
        return np.exp(mu - sigma * special.ndtri(1.0 / t))


class _LogWeibull(_Family):
    name = "log_weibull"
    params = ("theta", "c")

    def check(self, p):
        super().check(p)
        self._positive(p, self.params)

    def lower(self, theta, c):
        return c

    def logsf(self, x, theta, c):
        x = np.asarray(x, dtype=float)
        r = np.log(np.maximum(x, c) / c)
        return -(r ** theta)

    def quantile(self, t, theta, c):
        return c * np.exp(np.log(t) ** (1.0 / theta))


class _GPD(_Family):
    name = "gpd"
    params = ("gamma", "sigma")

    def check(self, p):
        super().check(p)
        self._positive(p, self.params)

    def lower(self, gamma, sigma):
        return 0.0

    def logsf(self, x, gamma, sigma):
        xp = np.maximum(x, 0.0)
        return -np.log1p(gamma * xp / sigma) / gamma

    def quantile(self, t, gamma, sigma):
        return sigma * np.expm1(gamma * np.log(t)) / gamma


class _StudentT(_Family):
    name = "student_t"
    params = ("nu",)
    closed_form = False

    def check(self, p):
        super().check(p)
        self._positive(p, self.params)

    def logsf(self, x, nu):
        with np.errstate(divide="ignore"):
            return np.log(special.stdtr(nu, -np.asarray(x, dtype=float)))

    def quantile(self, t, nu):
        return -special.stdtrit(nu, 1.0 / t)


class _Cauchy(_Family):
    name = "cauchy"
    params = ()

    def logsf(self, x):
        return np.log(np.arctan2(1.0, np.asarray(x, dtype=float)) / np.pi)

    def quantile(self, t):
        angle = np.pi / np.asarray(t, dtype=float)
        return np.cos(angle) / np.sin(angle)


class _Burr(_Family):
    # Burr type XII: F(x) = 1 - (1 + x^c)^(-d)
    name = "burr"
    params = ("c", "d")

    def check(self, p):
        super().check(p)
        self._positive(p, self.params)

    def lower(self, c, d):
        return 0.0

    def logsf(self, x, c, d):
        xp = np.maximum(x, 0.0)
        return -d * np.log1p(xp ** c)

    def quantile(self, t, c, d):
        return np.expm1(np.log(t) / d) ** (1.0 / c)


class _Exponential(_Family):
    name = "exponential"
    params = ("rate", "loc")

    def check(self, p):
        super().check(p)
        self._positive(p[:1], ("rate",))

    def lower(self, rate, loc):
        return loc

    def logsf(self, x, rate, loc):
        return -rate * np.maximum(np.asarray(x, dtype=float) - loc, 0.0)

    def quantile(self, t, rate, loc):
        return loc + np.log(t) / rate


class _Pareto(_Family):
    name = "pareto"
    params = ("alpha", "scale")

    def check(self, p):
        super().check(p)
        self._positive(p, self.params)

    def lower(self, alpha, scale):
        return scale

    def logsf(self, x, alpha, scale):
        return -alpha * np.log(np.maximum(x, scale) / scale)

    def quantile(self, t, alpha, scale):
        return scale * np.exp(np.log(t) / alpha)


FAMILIES = {f.name: f for f in (
    _Weibull(), _Normal(), _Gamma(), _ModifiedWeibull(), _ExtendedWeibull(),
    _LogNormal(), _LogWeibull(), _GPD(), _StudentT(), _Cauchy(), _Burr(),
    _Exponential(), _Pareto(),
)}

_ALIASES = {
    "w": "weibull", "n": "normal", "norm": "normal", "mw": "modified_weibull",
    "ew": "extended_weibull", "ln": "lognormal", "lw": "log_weibull",
    "t": "student_t", "exp": "exponential", "c": "cauchy",
}

# parameters that may be omitted on the command line
_DEFAULTS = {
    "exponential": (1.0, 0.0), "normal": (0.0, 1.0), "lognormal": (0.0, 1.0),
    "pareto": (1.0, 1.0), "extended_weibull": (2.0,),
}


@dataclass(frozen=True)
class DistributionSpec:
    """A family name plus its parameter tuple."""

    family: str
    params: tuple = ()

    def __post_init__(self):
        fam = _ALIASES.get(self.family, self.family)
        if fam not in FAMILIES:
            raise InvalidParameters(f"unknown distribution family {self.family!r}")
        object.__setattr__(self, "family", fam)
        params = tuple(float(v) for v in self.params)
        if not params and fam in _DEFAULTS:
            params = _DEFAULTS[fam]
        impl = FAMILIES[fam]
        if len(params) != len(impl.params):
            raise InvalidParameters(
                f"{fam} takes parameters {impl.params}, got {len(params)} values")
        impl.check(params)
        object.__setattr__(self, "params", params)

    @classmethod
    def parse(cls, text: str) -> "DistributionSpec":
        """Parse ``"family:p1,p2"``; fractions such as ``2/3`` are accepted."""
        name, _, rest = text.strip().partition(":")
        params = []
        for tok in filter(None, (s.strip() for s in rest.split(","))):
            try:
                params.append(float(Fraction(tok)))
            except (ValueError, ZeroDivisionError):
                raise InvalidParameters(f"bad parameter {tok!r} in {text!r}") from None
        return cls(name.strip().lower(), tuple(params))

    def __str__(self):
        return f"{self.family}:" + ",".join(f"{p:.17g}" for p in self.params)

    @property
    def impl(self) -> _Family:
        return FAMILIES[self.family]

    @property
    def lower(self) -> float:
        return float(self.impl.lower(*self.params))

    def logsf(self, x):
        return self.impl.logsf(np.asarray(x, dtype=float), *self.params)

    def sf(self, x):
        return np.exp(self.logsf(x))

    def cdf(self, x):
        return -np.expm1(self.logsf(x))

    def quantile(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(~(t > 1)):
            raise SupportError("tail quantile u(t) needs t > 1")
        return self.impl.quantile(t, *self.params)

    def draw(self, t):
        """Map tail levels ``t = 1/s`` to draws (inverse transform)."""
        return self.impl.draw(np.asarray(t, dtype=float), *self.params)

    def sample(self, n: int, seed=0) -> np.ndarray:
        return sample(self, n, seed)

    def to_dict(self):
        return {"family": self.family,
                "params": dict(zip(self.impl.params, self.params))}


def cdf(spec: DistributionSpec, x):
    return spec.cdf(x)


def sf(spec: DistributionSpec, x):
    return spec.sf(x)


def logsf(spec: DistributionSpec, x):
    return spec.logsf(x)


def quantile(spec: DistributionSpec, t):
    return spec.quantile(t)


def _tail_levels(rng: np.random.Generator, n: int) -> np.ndarray:
    s = 1.0 - rng.random(n)  # survival level in (0, 1]
    return np.maximum(1.0 / s, np.nextafter(1.0, 2.0))


def sample_from_quantile(draw, n: int, seed=0) -> np.ndarray:
    """Inverse-transform sample of size ``n`` through ``draw(t)``."""
    if int(n) != n or n < 1:
        raise InvalidParameters(f"sample size must be a positive integer, got {n}")
    rng = _as_bundle(seed).generator()
    return np.asarray(draw(_tail_levels(rng, int(n))), dtype=float)


def sample(spec: DistributionSpec, n: int, seed=0) -> np.ndarray:
    """i.i.d. sample of size ``n`` from ``spec``; reproducible per ``seed``."""
    return sample_from_quantile(spec.draw, n, seed)


def sample_top(dist, n: int, m: int, seed=0) -> np.ndarray:
    """The ``m`` largest order statistics of an i.i.d. sample of size ``n``.

    Returned in ascending order, i.e. ``X_(n-m+1) <= ... <= X_(n)``.  Uses the
    exponential-spacings representation of uniform order statistics, so the
    cost is O(m) however large ``n`` is.  ``dist`` is anything with a
    ``draw(t)`` method.
    """
    n, m = int(n), int(m)
    if m < 1 or m > n:
        raise InvalidParameters(f"need 1 <= m <= n, got m={m}, n={n}")
    rng = _as_bundle(seed).generator()
    partial = np.cumsum(rng.standard_exponential(m))
    total = partial[-1] + rng.standard_gamma(n + 1 - m)
    levels = partial / total  # survival levels of X_(n), X_(n-1), ...
    return np.asarray(dist.draw(1.0 / levels), dtype=float)[::-1].copy()
