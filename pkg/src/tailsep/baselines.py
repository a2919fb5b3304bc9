"""Comparison statistics: Hasofer-Wang W_n(k) and the ratio statistic R_n(k).

Neither statistic has tabulated null quantiles here, so critical values are
calibrated by Monte Carlo under the standard exponential null.  Both
statistics only use differences and ratios of order statistics, so the
calibration applies to any location and scale.

Direction of the rules: under a heavier (Frechet-type) tail the top
exceedances look like a GPD with gamma > 0, for which ``k W ~ 1 - 2 gamma``
drops below its exponential value 1 while the ratio statistic grows.  The
default sides are therefore ``left`` for Hasofer-Wang and ``right`` for the
ratio statistic.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .distributions import DistributionSpec, SeedBundle, sample_top
from .errors import InvalidParameters, TiedThresholdError
from .tail_tests import SortedSample, _as_sorted

__all__ = [
    "hasofer_wang",
    "ratio_statistic",
    "BASELINES",
    "DEFAULT_SIDE",
    "CriticalValueTable",
    "calibrate_critical_values",
    "baseline_reject",
]


def hasofer_wang(sample, k: int) -> float:
    """W_n(k) = k (mean - X_(n-k+1))^2 / ((k-1) sum_j (mean - X_(n-j))^2) over the top k."""
    s = _as_sorted(sample)
    if int(k) != k or not 2 <= k < s.n:
        raise InvalidParameters(f"need 2 <= k < n, got k={k}, n={s.n}")
    k = int(k)
    top = s.top(k)
    mean = top.mean()
    dev = mean - top
    denom = (k - 1) * float(np.dot(dev, dev))
    if not denom > 0:
        raise TiedThresholdError("top-k order statistics are all equal")
    return k * (mean - top[0]) ** 2 / denom


def ratio_statistic(sample, k: int) -> float:
    """R_n(k) = (X_(n) - X_(n-k)) / (mean of top k - X_(n-k))."""
    s = _as_sorted(sample)
    if int(k) != k or not 1 <= k < s.n:
        raise InvalidParameters(f"need 1 <= k < n, got k={k}, n={s.n}")
    k = int(k)
    threshold = s.order_stat(s.n - k)
    top = s.top(k)
    denom = top.mean() - threshold
    if not denom > 0:
        raise TiedThresholdError("top-k order statistics all equal the threshold")
    return (top[-1] - threshold) / denom


BASELINES = {"hasofer_wang": hasofer_wang, "ratio": ratio_statistic}
DEFAULT_SIDE = {"hasofer_wang": "left", "ratio": "right"}


def _baseline(kind):
    kind = kind.replace("-", "_")
    if kind not in BASELINES:
        raise InvalidParameters(f"unknown baseline {kind!r}; choose from {sorted(BASELINES)}")
    return kind


@dataclass
class CriticalValueTable:
    """Null critical values indexed by (alpha, k).

    For ``side="right"`` the entry is the empirical (1 - alpha)-quantile of
    the statistic under Exp(1); for ``side="left"`` the alpha-quantile.
    """

    kind: str
    side: str
    alpha_levels: np.ndarray
    k_grid: np.ndarray
    n: int
    m: int
    seed: int
    values: np.ndarray = field(repr=False)  # shape (len(alpha_levels), len(k_grid))

    def critical_value(self, k: int, alpha: float) -> float:
        ia = np.flatnonzero(np.isclose(self.alpha_levels, alpha, rtol=0, atol=1e-12))
        ik = np.flatnonzero(self.k_grid == k)
        if ia.size == 0 or ik.size == 0:
            raise InvalidParameters(f"table has no entry for k={k}, alpha={alpha}")
        return float(self.values[ia[0], ik[0]])

    def reject(self, statistic: float, k: int, alpha: float) -> bool:
        c = self.critical_value(k, alpha)
        return bool(statistic > c) if self.side == "right" else bool(statistic < c)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kind", "side", "n", "m", "seed", "alpha", "k", "critical_value"])
        for i, a in enumerate(self.alpha_levels):
            for j, k in enumerate(self.k_grid):
                w.writerow([self.kind, self.side, self.n, self.m, self.seed,
                            repr(float(a)), int(k), repr(float(self.values[i, j]))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "CriticalValueTable":
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            raise InvalidParameters("empty critical value table")
        alphas = sorted({float(r["alpha"]) for r in rows})
        ks = sorted({int(r["k"]) for r in rows})
        values = np.full((len(alphas), len(ks)), np.nan)
        for r in rows:
            values[alphas.index(float(r["alpha"])), ks.index(int(r["k"]))] = float(r["critical_value"])
        if np.isnan(values).any():
            raise InvalidParameters("critical value table is incomplete")
        r0 = rows[0]
        return cls(r0["kind"], r0["side"], np.array(alphas), np.array(ks), int(r0["n"]),
                   int(r0["m"]), int(r0["seed"]), values)


def _null_statistics(kind, k_grid, n, m, seed):
    fn = BASELINES[kind]
    null = DistributionSpec("exponential", (1.0, 0.0))
    top_needed = int(max(k_grid)) + 1
    out = np.empty((m, len(k_grid)))
    for r in range(m):
        top = sample_top(null, n, top_needed, SeedBundle(seed, r))
        s = SortedSample(top, n=n, assume_sorted=True)
        out[r] = [fn(s, int(k)) for k in k_grid]
    return out


def calibrate_critical_values(kind: str, alpha_levels, k_grid, n: int, m: int = 1000,
                              seed: int = 0, side: str | None = None) -> CriticalValueTable:
    """Monte Carlo critical values under i.i.d. Exp(1) samples of size ``n``.

    Replication ``r`` uses stream ``r`` of ``seed``, so the table is a pure
    function of its arguments.
    """
    kind = _baseline(kind)
    side = side or DEFAULT_SIDE[kind]
    if side not in ("left", "right"):
        raise InvalidParameters(f"side must be 'right' or 'left', got {side!r}")
    if m < 1000:
        raise InvalidParameters(f"calibration needs m >= 1000 replications, got {m}")
    alpha_levels = np.asarray(alpha_levels, dtype=float)
    k_grid = np.asarray(k_grid, dtype=int)
    if np.any((alpha_levels <= 0) | (alpha_levels >= 1)):
        raise InvalidParameters("alpha levels must lie in (0, 1)")
    if k_grid.min() < (2 if kind == "hasofer_wang" else 1) or k_grid.max() >= n:
        raise InvalidParameters(f"k grid must lie inside [1, n) for n={n}")
    stats = _null_statistics(kind, k_grid, n, m, seed)
    probs = 1.0 - alpha_levels if side == "right" else alpha_levels
    values = np.quantile(stats, probs, axis=0)
    return CriticalValueTable(kind, side, alpha_levels, k_grid, int(n), int(m), int(seed),
                              np.atleast_2d(values))


def baseline_reject(sample, k: int, table: CriticalValueTable, alpha: float) -> tuple[float, bool]:
    """Statistic value and decision of the baseline test described by ``table``."""
    stat = BASELINES[table.kind](sample, k)
    return stat, table.reject(stat, k, alpha)
