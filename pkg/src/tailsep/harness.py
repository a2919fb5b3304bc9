"""Monte Carlo rejection-rate curves over k and a heuristic for choosing k."""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import baselines
from .distributions import DistributionSpec, SeedBundle, sample_top
from .errors import InvalidParameters, TailsepError
from .separators import SeparatorCdf
from .tail_tests import SortedSample, location_scale_free_test, scale_free_test

__all__ = [
    "TESTS",
    "PRESETS",
    "ExperimentSpec",
    "RejectionCurve",
    "KBehavior",
    "run_rejection_curve",
    "score_path",
    "classify_k_behavior",
    "mann_kendall",
]

TESTS = ("scale_free", "location_scale_free", "hasofer_wang", "ratio")

PRESETS = {
    "full": {"n": 5000, "m": 1000, "k_grid": tuple(range(10, 1001, 10)), "alpha": 0.05},
    "desk": {"n": 2000, "m": 200, "k_grid": tuple(range(5, 501, 5)), "alpha": 0.05},
}

TREND_TAU = 0.6
OSCILLATION_KMAX = 250


@dataclass(frozen=True)
class ExperimentSpec:
    distribution: DistributionSpec
    test: str
    n: int
    m: int
    k_grid: tuple
    alpha: float = 0.05
    side: str | None = None
    seed: int = 0
    separator: SeparatorCdf | None = None
    gamma: float | None = None  # sigma(gamma) override for the location-scale free test
    calibration_m: int = 2000
    calibration_seed: int | None = None

    def __post_init__(self):
        test = self.test.replace("-", "_")
        object.__setattr__(self, "test", test)
        object.__setattr__(self, "k_grid", tuple(int(k) for k in self.k_grid))
        if test not in TESTS:
            raise InvalidParameters(f"unknown test {self.test!r}; choose from {TESTS}")
        if self.side is None:
            object.__setattr__(self, "side", baselines.DEFAULT_SIDE.get(test, "right"))
        if self.side not in ("left", "right"):
            raise InvalidParameters(f"side must be 'right' or 'left', got {self.side!r}")
        if self.m < 1:
            raise InvalidParameters(f"need m >= 1 replications, got {self.m}")
        if not self.k_grid or min(self.k_grid) < 1:
            raise InvalidParameters("k grid must be non-empty with k >= 1")
        if not 0 < self.alpha <= 1:
            raise InvalidParameters(f"alpha must lie in (0, 1], got {self.alpha}")
        kmax = max(self.k_grid)
        if test == "location_scale_free" and not 2 * kmax < self.n:
            raise InvalidParameters(f"location-scale free test needs 2k < n; max k={kmax}, n={self.n}")
        if kmax >= self.n:
            raise InvalidParameters(f"max k={kmax} must be below n={self.n}")
        if test in ("scale_free", "location_scale_free") and self.separator is None:
            raise InvalidParameters(f"test {test} needs a separator")

    @property
    def top_needed(self) -> int:
        kmax = max(self.k_grid)
        return 2 * kmax + 1 if self.test == "location_scale_free" else kmax + 1

    def to_dict(self):
        return {
            "distribution": self.distribution.to_dict(),
            "test": self.test,
            "separator": None if self.separator is None else self.separator.to_dict(),
            "n": self.n,
            "m": self.m,
            "alpha": self.alpha,
            "side": self.side,
            "seed": self.seed,
            "gamma": self.gamma,
            "k_grid": list(self.k_grid),
        }


@dataclass
class RejectionCurve:
    k_grid: np.ndarray
    rates: np.ndarray
    stderr: np.ndarray
    n_errors: np.ndarray
    spec: ExperimentSpec
    calibration: dict | None = field(default=None, repr=False)

    @property
    def m_effective(self) -> np.ndarray:
        return self.spec.m - self.n_errors

    def rate_at(self, k: int) -> float:
        return float(self.rates[list(self.k_grid).index(k)])

    def stderr_at(self, k: int) -> float:
        return float(self.stderr[list(self.k_grid).index(k)])

    def to_csv(self) -> str:
        lines = ["k,rate,stderr,n_errors"]
        for k, r, s, e in zip(self.k_grid, self.rates, self.stderr, self.n_errors):
            lines.append(f"{int(k)},{r:.17g},{s:.17g},{int(e)}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {
            "spec": self.spec.to_dict(),
            "k": [int(k) for k in self.k_grid],
            "rate": [_num(r) for r in self.rates],
            "stderr": [_num(s) for s in self.stderr],
            "n_errors": [int(e) for e in self.n_errors],
        }
        if self.calibration is not None:
            doc["calibration"] = self.calibration
        return json.dumps(doc, indent=2)


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _decisions(spec: ExperimentSpec, sample: SortedSample, table) -> tuple[np.ndarray, np.ndarray]:
    """Rejection and error indicators for each k on one replication."""
    rej = np.zeros(len(spec.k_grid), dtype=bool)
    err = np.zeros(len(spec.k_grid), dtype=bool)
    for j, k in enumerate(spec.k_grid):
        try:
            if spec.test == "scale_free":
                rej[j] = scale_free_test(sample, k, spec.separator, spec.alpha, spec.side).reject
            elif spec.test == "location_scale_free":
                rej[j] = location_scale_free_test(sample, k, spec.separator, spec.alpha,
                                                  spec.side, spec.gamma).reject
            else:
                stat = baselines.BASELINES[spec.test](sample, k)
                # alpha = 1 puts the critical value at the extreme of the null
                rej[j] = True if spec.alpha >= 1 else table.reject(stat, k, spec.alpha)
        except TailsepError:
            err[j] = True
    return rej, err


def _run_block(spec: ExperimentSpec, table, streams) -> tuple[np.ndarray, np.ndarray]:
    rejects = np.zeros(len(spec.k_grid), dtype=np.int64)
    errors = np.zeros(len(spec.k_grid), dtype=np.int64)
    for r in streams:
        top = sample_top(spec.distribution, spec.n, spec.top_needed, SeedBundle(spec.seed, r))
        rej, err = _decisions(spec, SortedSample(top, n=spec.n, assume_sorted=True), table)
        rejects += rej
        errors += err
    return rejects, errors


def run_rejection_curve(spec: ExperimentSpec, table=None, workers: int = 1) -> RejectionCurve:
    """Fraction of ``spec.m`` replications rejected at every k of the grid.

    Replication ``r`` draws from stream ``r`` of ``spec.seed``.  Replications
    where the statistic cannot be evaluated at some k (e.g. tied order
    statistics) are left out of that k's denominator and counted in
    ``n_errors``.  Baseline tests calibrate their critical values under Exp(1)
    unless a table is passed in.
    """
    calibration = None
    if spec.test in baselines.BASELINES and spec.alpha < 1:
        if table is None:
            cal_seed = spec.seed + 1 if spec.calibration_seed is None else spec.calibration_seed
            table = baselines.calibrate_critical_values(
                spec.test, [spec.alpha], spec.k_grid, spec.n,
                max(spec.calibration_m, 1000), cal_seed, spec.side)
        calibration = {"kind": table.kind, "side": table.side, "n": table.n, "m": table.m,
                       "seed": table.seed}

    if workers > 1 and spec.m > 1:
        blocks = [range(i, spec.m, workers) for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_block, [spec] * workers, [table] * workers, blocks))
        rejects = sum(p[0] for p in parts)
        errors = sum(p[1] for p in parts)
    else:
        rejects, errors = _run_block(spec, table, range(spec.m))

    m_eff = spec.m - errors
    with np.errstate(invalid="ignore", divide="ignore"):
        rates = np.where(m_eff > 0, rejects / m_eff, np.nan)
        stderr = np.sqrt(rates * (1.0 - rates) / m_eff)
    return RejectionCurve(np.array(spec.k_grid), rates, stderr, errors, spec, calibration)


def score_path(sample, k_grid, test: str, separator: SeparatorCdf, gamma: float | None = None):
    """Scores sqrt(k)(S - 1) of one sample along a k grid, with their sigma."""
    s = sample if isinstance(sample, SortedSample) else SortedSample(sample)
    fn = {"scale_free": scale_free_test, "location_scale_free": location_scale_free_test}
    test = test.replace("-", "_")
    out, sig = [], []
    for k in k_grid:
        if test == "location_scale_free":
            o = location_scale_free_test(s, k, separator, gamma=gamma)
        else:
            o = fn[test](s, k, separator)
        out.append(o.score)
        sig.append(o.sigma)
    return np.array(out), np.array(sig)


def mann_kendall(values) -> tuple[float, float]:
    """Kendall tau of a series against its index and the two-sided p-value."""
    values = np.asarray(values, dtype=float)
    res = stats.kendalltau(np.arange(values.size), values)
    return float(res.statistic), float(res.pvalue)


@dataclass(frozen=True)
class KBehavior:
    behavior: str  # increasing_reject, decreasing_accept or oscillating
    exceed_fraction: float
    trend_stat: float
    interval: tuple
    reject: bool


def classify_k_behavior(k_grid, scores, u: float, alpha: float = 0.05,
                        tau_threshold: float = TREND_TAU,
                        k_max: int = OSCILLATION_KMAX) -> KBehavior:
    """Read a test decision off the whole path k -> score.

    * a well expressed upward trend (Kendall tau >= ``tau_threshold``) that
      ends with a run above ``u``: reject;
    * a well expressed downward trend ending with a run below ``u``: accept;
    * otherwise the path oscillates around ``u``; reject when the fraction of
      k <= ``k_max`` with score above ``u`` exceeds ``alpha``.

    Orient ``scores`` so that large values speak against the null (negate
    them for a left-sided rule).
    """
    k = np.asarray(k_grid, dtype=float)
    s = np.asarray(scores, dtype=float)
    if k.shape != s.shape or k.size < 10:
        raise InvalidParameters("need at least 10 (k, score) points of matching length")
    if np.any(~np.isfinite(s)):
        raise InvalidParameters("scores must be finite")
    order = np.argsort(k)
    k, s = k[order], s[order]
    tau, _ = mann_kendall(s)
    above = s > u

    small = k <= k_max
    if small.sum() == 0:
        small = np.ones_like(above)
    interval = (int(k[small].min()), int(k[small].max()))
    frac = float(above[small].mean())

    if tau >= tau_threshold and above[-1]:
        run_start = k.size - np.argmin(above[::-1]) if not above.all() else 0
        return KBehavior("increasing_reject", float(above.mean()), tau,
                         (int(k[run_start]), int(k[-1])), True)
    if tau <= -tau_threshold and not above[-1]:
        run_start = k.size - np.argmax(above[::-1]) if above.any() else 0
        return KBehavior("decreasing_accept", float(above.mean()), tau,
                         (int(k[run_start]), int(k[-1])), False)
    return KBehavior("oscillating", frac, tau, interval, frac > alpha)
