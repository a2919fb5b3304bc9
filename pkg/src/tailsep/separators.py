"""Separating distributions and grid checks of the tail-ordering conditions.

A separating cdf ``F0`` sits between a lighter class of tails and a heavier
one.  Two constructions are provided:

* ``weibull_vs_logweibull(b)``:  ``1 - F0(x) = exp(-exp(b sqrt(ln x)))``, x > 1
* ``logweibull_vs_rv(b)``:       ``1 - F0(x) = exp(-exp(b sqrt(ln ln x)) ln x)``, x > e

The condition checkers evaluate an inequality over a finite (t, c) window.
The conditions themselves are asymptotic ("for all t > t0"), so a passing
report certifies the window only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .distributions import DistributionSpec, sample_from_quantile
from .errors import InvalidParameters, SupportError

# shape parameters used in the simulation study
W_VS_LW_SCALE_FREE_B = 1.8
W_VS_LW_LOCATION_B = 3.5
LW_VS_RV_SCALE_FREE_B = 0.6
LW_VS_RV_LOCATION_B = 1.1

MARGIN_TOL = 1e-12


def default_t_grid():
    return np.logspace(6.0, 12.0, 40)


def default_c_grid():
    return np.logspace(0.0, 3.0, 41)[1:]


def u0_weibull_vs_logweibull(b: float, t):
    """Tail quantile ``exp((ln ln t / b)^2)`` of the Weibull/log-Weibull separator."""
    if not b > 0:
        raise InvalidParameters(f"b must be > 0, got {b}")
    t = np.asarray(t, dtype=float)
    if np.any(~(t > math.e)):
        raise SupportError("u0 of the Weibull/log-Weibull separator needs t > e")
    return np.exp((np.log(np.log(t)) / b) ** 2)


def u0_logweibull_vs_rv(b: float, t):
    """Tail quantile of the log-Weibull/regularly-varying separator.

    With ``s = sqrt(ln ln x)`` the equation ``exp(b s) ln x = ln t`` becomes
    the quadratic ``s^2 + b s = ln ln t``, solved here in a cancellation-free
    form.  For ``1 < t <= e`` the generalised inverse is the support edge e.
    """
    if not b > 0:
        raise InvalidParameters(f"b must be > 0, got {b}")
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 1)):
        raise SupportError("u0 needs t > 1")
    with np.errstate(invalid="ignore", divide="ignore"):
        lnln_t = np.log(np.log(t))
    lnln_t = np.where(t > math.e, lnln_t, 0.0)
    s = 2.0 * lnln_t / (b + np.sqrt(b * b + 4.0 * lnln_t))
    return np.exp(np.exp(s * s))


@dataclass(frozen=True)
class SeparatorCdf:
    """A separating distribution F0.

    ``gamma`` is the extreme value index of F0, used for the variance of the
    location and scale free statistic.  ``domain_lower`` is the left edge of
    the support; F0 has no mass below it.
    """

    kind: str
    b: float | None = None
    gamma: float = 0.0
    domain_lower: float = -math.inf
    dist: DistributionSpec | None = None
    custom_logsf: Callable | None = field(default=None, compare=False, repr=False)
    custom_quantile: Callable | None = field(default=None, compare=False, repr=False)
    name: str = ""

    def __post_init__(self):
        if self.kind not in ("w-lw", "lw-rv", "exponential", "custom"):
            raise InvalidParameters(f"unknown separator kind {self.kind!r}")
        if self.kind in ("w-lw", "lw-rv") and not (self.b is not None and self.b > 0):
            raise InvalidParameters(f"separator {self.kind} needs b > 0, got {self.b}")
        if not self.gamma >= 0:
            raise InvalidParameters(f"gamma must be >= 0, got {self.gamma}")
        if self.kind == "custom" and self.dist is None and (
                self.custom_logsf is None or self.custom_quantile is None):
            raise InvalidParameters("custom separator needs a distribution or logsf+quantile")

    def with_gamma(self, gamma: float) -> "SeparatorCdf":
        return SeparatorCdf(self.kind, self.b, gamma, self.domain_lower, self.dist,
                            self.custom_logsf, self.custom_quantile, self.name)

    def logsf(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "w-lw":
            lx = np.log(np.maximum(x, 1.0))
            # right-continuous at the edge, which carries the atom 1 - 1/e
            return np.where(x >= 1.0, -np.exp(self.b * np.sqrt(lx)), 0.0)
        if self.kind == "lw-rv":
            lx = np.log(np.maximum(x, math.e))
            return np.where(x >= math.e, -np.exp(self.b * np.sqrt(np.log(lx))) * lx, 0.0)
        if self.kind == "exponential":
            return -np.maximum(x, 0.0)
        if self.dist is not None:
            return self.dist.logsf(x)
        return np.asarray(self.custom_logsf(x), dtype=float)

    def sf(self, x):
        return np.exp(self.logsf(x))

    def cdf(self, x):
        return -np.expm1(self.logsf(x))

    def quantile(self, t):
        """Generalised inverse ``u0(t) = inf{x : F0(x) >= 1 - 1/t}``, t > 1.

        Both constructions put the mass ``1 - 1/e`` on their left support
        edge, so levels with ``t <= e`` map onto that edge.
        """
        t = np.asarray(t, dtype=float)
        if np.any(~(t > 1)):
            raise SupportError("u0 needs t > 1")
        if self.kind == "w-lw":
            safe = np.where(t > math.e, t, math.e + 1.0)
            return np.where(t > math.e, u0_weibull_vs_logweibull(self.b, safe), 1.0)
        if self.kind == "lw-rv":
            return u0_logweibull_vs_rv(self.b, t)
        if self.kind == "exponential":
            return np.log(t)
        if self.dist is not None:
            return self.dist.quantile(t)
        return np.asarray(self.custom_quantile(t), dtype=float)

    def draw(self, t):
        return self.quantile(np.maximum(np.asarray(t, dtype=float), np.nextafter(1.0, 2.0)))

    def sample(self, n: int, seed=0) -> np.ndarray:
        return sample_from_quantile(self.draw, n, seed)

    def describe(self) -> str:
        if self.name:
            return self.name
        if self.kind in ("w-lw", "lw-rv"):
            return f"{self.kind}(b={self.b:g})"
        if self.dist is not None:
            return str(self.dist)
        return self.kind

    def to_dict(self):
        return {"kind": self.kind, "b": self.b, "gamma": self.gamma,
                "domain_lower": self.domain_lower, "name": self.describe()}


def weibull_vs_logweibull(b: float = W_VS_LW_SCALE_FREE_B) -> SeparatorCdf:
    return SeparatorCdf("w-lw", b=float(b), gamma=0.0, domain_lower=1.0)


def logweibull_vs_rv(b: float = LW_VS_RV_SCALE_FREE_B, gamma: float = 0.0) -> SeparatorCdf:
    # the extreme value index of this F0 sits on the Gumbel/Frechet boundary;
    # gamma=0 unless the caller overrides it
    return SeparatorCdf("lw-rv", b=float(b), gamma=float(gamma), domain_lower=math.e)


def standard_exponential() -> SeparatorCdf:
    return SeparatorCdf("exponential", gamma=0.0, domain_lower=0.0)


def from_distribution(dist: DistributionSpec, gamma: float = 0.0, name: str = "") -> SeparatorCdf:
    return SeparatorCdf("custom", gamma=float(gamma), domain_lower=dist.lower, dist=dist,
                        name=name or str(dist))


def pareto(alpha: float = 1.0) -> SeparatorCdf:
    """Pareto separator ``F0(x) = 1 - x^-alpha``, x > 1 (index 1/alpha)."""
    return from_distribution(DistributionSpec("pareto", (alpha, 1.0)), gamma=1.0 / alpha,
                             name=f"pareto({alpha:g})")


def custom(logsf: Callable, quantile: Callable, gamma: float = 0.0,
           domain_lower: float = -math.inf, name: str = "custom") -> SeparatorCdf:
    return SeparatorCdf("custom", gamma=float(gamma), domain_lower=domain_lower,
                        custom_logsf=logsf, custom_quantile=quantile, name=name)


def make_separator(kind: str, b: float | None = None, gamma: float | None = None) -> SeparatorCdf:
    """Build a separator from a short name: w-lw, lw-rv, exponential, pareto."""
    kind = kind.lower()
    if kind == "w-lw":
        sep = weibull_vs_logweibull(W_VS_LW_SCALE_FREE_B if b is None else b)
    elif kind == "lw-rv":
        sep = logweibull_vs_rv(LW_VS_RV_SCALE_FREE_B if b is None else b)
    elif kind in ("exponential", "exp"):
        sep = standard_exponential()
    elif kind == "pareto":
        sep = pareto(1.0 if b is None else b)
    else:
        raise InvalidParameters(f"unknown separator {kind!r}")
    if gamma is not None:
        sep = sep.with_gamma(gamma)
    return sep


def default_b(kind: str, test: str) -> float | None:
    """b used in the simulation study for a (separator, test) pair."""
    location = test.replace("_", "-") == "location-scale-free"
    if kind == "w-lw":
        return W_VS_LW_LOCATION_B if location else W_VS_LW_SCALE_FREE_B
    if kind == "lw-rv":
        return LW_VS_RV_LOCATION_B if location else LW_VS_RV_SCALE_FREE_B
    return None


# ---------------------------------------------------------------------------
# condition checks
# ---------------------------------------------------------------------------

@dataclass
class ConditionReport:
    """Outcome of a grid check.

    ``margins`` holds the relative slack ``1 - LHS/RHS`` of the inequality at
    every grid point (for the B-condition: the decrease of the log ratio
    between adjacent grid points).  ``witness`` locates the worst point.
    """

    condition: str
    parameter: float
    t_grid: np.ndarray
    c_grid: np.ndarray | None
    margins: np.ndarray
    worst_margin: float
    holds: bool
    witness: tuple | None
    tolerance: float = MARGIN_TOL

    def to_dict(self):
        return {
            "condition": self.condition,
            "parameter": self.parameter,
            "t_range": [float(self.t_grid[0]), float(self.t_grid[-1])],
            "n_t": int(len(self.t_grid)),
            "c_range": None if self.c_grid is None else
            [float(self.c_grid[0]), float(self.c_grid[-1])],
            "n_c": None if self.c_grid is None else int(len(self.c_grid)),
            "worst_margin": float(self.worst_margin),
            "holds": bool(self.holds),
            "witness": None if self.witness is None else [float(v) for v in self.witness],
            "tolerance": self.tolerance,
        }


def _quantile_fn(obj) -> Callable:
    return obj.quantile if hasattr(obj, "quantile") else obj


def _logsf_fn(obj) -> Callable:
    if hasattr(obj, "logsf"):
        return obj.logsf
    # plain callables are taken to be cdfs
    return lambda x: np.log1p(-np.asarray(obj(x), dtype=float))


def _report(condition, parameter, t_grid, c_grid, margins, tol):
    flat = int(np.argmin(margins))
    worst = float(margins.flat[flat])
    holds = worst >= -tol
    if c_grid is None:
        witness = (float(t_grid[flat]), float(t_grid[flat + 1]))
    else:
        i, j = np.unravel_index(flat, margins.shape)
        witness = (float(t_grid[i]), float(c_grid[j]))
    return ConditionReport(condition, parameter, np.asarray(t_grid), c_grid, margins,
                           worst, holds, witness, tol)


def _grids(t_grid, c_grid):
    t = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    c = default_c_grid() if c_grid is None else np.asarray(c_grid, dtype=float)
    if t.ndim != 1 or c.ndim != 1 or not t.size or not c.size:
        raise InvalidParameters("grids must be non-empty 1-d arrays")
    if np.any(~np.isfinite(t)) or np.any(~np.isfinite(c)) or np.any(t <= 1) or np.any(c <= 1):
        raise InvalidParameters("need finite t > 1 and c > 1 on the grids")
    return t, c


def _log_positive(values, what):
    values = np.asarray(values, dtype=float)
    if np.any(~(values > 0)) or np.any(~np.isfinite(values)):
        raise SupportError(f"{what} must be finite and positive on the grid")
    return np.log(values)


def check_C_delta(u_H, u_G, delta: float, t_grid=None, c_grid=None,
                  tol: float = MARGIN_TOL) -> ConditionReport:
    """Check ``u_H(c^(1+delta) t) / u_G(c t) <= u_H(t) / u_G(t)`` on a grid.

    ``u_H`` and ``u_G`` are quantile functions (or objects with a
    ``quantile`` method) that are positive on the grid.
    """
    if not delta >= 0:
        raise InvalidParameters(f"delta must be >= 0, got {delta}")
    t, c = _grids(t_grid, c_grid)
    qh, qg = _quantile_fn(u_H), _quantile_fn(u_G)
    T, C = t[:, None], c[None, :]
    lhs = (_log_positive(qh(C ** (1.0 + delta) * T), "u_H")
           - _log_positive(qg(C * T), "u_G"))
    rhs = _log_positive(qh(t), "u_H") - _log_positive(qg(t), "u_G")
    margins = -np.expm1(lhs - rhs[:, None])
    return _report("C_delta" if delta > 0 else "C_zero", float(delta), t, c, margins, tol)


def check_B_condition(H, G, epsilon: float, x_grid, tol: float = MARGIN_TOL) -> ConditionReport:
    """Check that ``(1 - H(x))^(1-eps) / (1 - G(x))`` does not increase on ``x_grid``.

    ``H`` and ``G`` may be distribution objects (their ``logsf`` is used) or
    plain cdf callables.
    """
    if not 0 < epsilon < 1:
        raise InvalidParameters(f"epsilon must lie in (0, 1), got {epsilon}")
    x = np.asarray(x_grid, dtype=float)
    if x.ndim != 1 or x.size < 2 or np.any(np.diff(x) <= 0):
        raise InvalidParameters("x_grid must be strictly increasing with >= 2 points")
    lh, lg = _logsf_fn(H)(x), _logsf_fn(G)(x)
    if np.any(~(lh < 0)) or np.any(~(lg < 0)) or np.any(~np.isfinite(lh + lg)):
        raise SupportError("x_grid must lie inside both supports")
    log_ratio = (1.0 - epsilon) * lh - lg
    margins = -np.diff(log_ratio)
    return _report("B", float(epsilon), x, None, margins, tol)


def check_prop1(H, G, delta: float, t_grid=None, c_grid=None,
                tol: float = MARGIN_TOL) -> ConditionReport:
    """Check the survival-ratio inequality implied by ``C_delta(H, G)``.

    With ``eps = 1 - 1/(1 + delta)`` this verifies, in log space,

        (1-eps) [ln S_H(c u_H(t)) - ln S_H(u_H(t))] <= ln S_G(c u_G(t)) - ln S_G(u_G(t)).

    ``H`` and ``G`` need ``logsf`` and ``quantile`` methods.
    """
    if not delta >= 0:
        raise InvalidParameters(f"delta must be >= 0, got {delta}")
    t, c = _grids(t_grid, c_grid)
    eps = 1.0 - 1.0 / (1.0 + delta)
    T, C = t[:, None], c[None, :]
    uh, ug = H.quantile(t)[:, None], G.quantile(t)[:, None]
    lhs = (1.0 - eps) * (H.logsf(C * uh) - H.logsf(uh))
    rhs = G.logsf(C * ug) - G.logsf(ug)
    if np.any(~np.isfinite(lhs)) or np.any(~np.isfinite(rhs)):
        raise SupportError("survival functions underflow or leave the support on the grid")
    # slack (RHS - LHS) / max(LHS, RHS) of the survival ratios
    margins = -np.expm1(lhs - rhs) * np.exp(rhs - np.maximum(lhs, rhs))
    return _report("Prop1", float(delta), t, c, margins, tol)
