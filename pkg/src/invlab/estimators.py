"""Volatility estimators, log-average convention, bin-of-day stats, invariants."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingest import Bin, BinTable

VOL_METHODS = ("squared_returns_10s", "rogers_satchell")


def log_mean(values) -> float:
    """Geometric mean exp(mean(log x)); the toolkit-wide average convention.

    Robust to heavy-tailed samples and consistent with fitting power laws
    of log quantities.
    """
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("log_mean of empty collection")
    bad = ~(arr > 0)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise ValueError(f"non-positive value at index {i}: {arr[i]!r}")
    return float(np.exp(np.mean(np.log(arr))))


@dataclass(frozen=True)
class VolatilityEstimate:
    sigma: float                 # per-bin log-return volatility, not annualized
    method: str

    def __post_init__(self):
        if self.method not in VOL_METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if not (self.sigma >= 0 or np.isnan(self.sigma)):
            raise ValueError("sigma must be non-negative")

    def in_ticks(self, price: float, tick: float) -> float:
        """Report-time conversion of log-return vol to tick units."""
        return self.sigma * price / tick


def vol_squared_returns(bin_: Bin) -> VolatilityEstimate:
    """Total-bin volatility: sqrt of the sum of squared 10-second returns."""
    r = np.asarray(bin_.returns_10s, dtype=float)
    if r.size == 0:
        return VolatilityEstimate(float("nan"), "squared_returns_10s")
    return VolatilityEstimate(float(np.sqrt(np.sum(r * r))), "squared_returns_10s")


def rs_variance(open_, high, low, close) -> np.ndarray:
    """Rogers-Satchell variance, drift-robust, from OHLC (vectorized).

    Both terms are products of same-sign logs, so the result is >= 0 for
    any bar with low <= open, close <= high.
    """
    o = np.asarray(open_, float)
    h = np.asarray(high, float)
    lo = np.asarray(low, float)
    c = np.asarray(close, float)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.log(h / o) * np.log(h / c) + np.log(lo / o) * np.log(lo / c)


def vol_rogers_satchell(open_: float, high: float, low: float, close: float) -> VolatilityEstimate:
    if not (low <= open_ <= high and low <= close <= high and low > 0):
        raise ValueError(f"invalid OHLC ordering: O={open_} H={high} L={low} C={close}")
    return VolatilityEstimate(float(np.sqrt(rs_variance(open_, high, low, close))),
                              "rogers_satchell")


def bin_sigma(bins: BinTable, method: str = "rogers_satchell") -> np.ndarray:
    """Per-bin sigma array for a whole table; NaN where undefined."""
    if method == "rogers_satchell":
        var = rs_variance(bins.open, bins.high, bins.low, bins.close)
        return np.sqrt(var)
    if method == "squared_returns_10s":
        sq = np.add.reduceat(bins.r10 * bins.r10,
                             np.minimum(bins.r10_offsets[:-1], max(len(bins.r10) - 1, 0))) \
            if len(bins.r10) else np.zeros(len(bins))
        counts = np.diff(bins.r10_offsets)
        return np.where(counts > 0, np.sqrt(np.where(counts > 0, sq, 0.0)), np.nan)
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# Bin-of-day averaging
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BinOfDayStats:
    bin_index: int
    mean_log_N: float
    mean_log_V: float
    mean_log_Q: float
    mean_log_P: float
    mean_log_sigma: float
    mean_log_W: float
    n_days: int


def _valid_mask(bins: BinTable, sigma: np.ndarray) -> np.ndarray:
    # zero-activity and zero-volatility (day, bin) rows carry no log-statistics
    with np.errstate(invalid="ignore"):
        return (bins.n > 0) & (bins.v > 0) & np.isfinite(bins.p) & (sigma > 0)


def bin_of_day_table(bins: BinTable, sigma: np.ndarray) -> list[BinOfDayStats]:
    """Across-days mean of log quantities for every qualifying bin index.

    W is formed per (day, bin) as P*V*sigma before averaging. Days where a
    quantity would be non-positive at that index are excluded.
    """
    sigma = np.asarray(sigma, float)
    if sigma.shape != bins.n.shape:
        raise ValueError("sigma array must align with the bin table")
    mask = _valid_mask(bins, sigma)
    if not np.any(mask):
        return []
    bi = bins.bin_index[mask]
    logs = np.column_stack([
        np.log(bins.n[mask]),
        np.log(bins.v[mask]),
        np.log(bins.q[mask]),
        np.log(bins.p[mask]),
        np.log(sigma[mask]),
        np.log(bins.p[mask] * bins.v[mask] * sigma[mask]),
    ])
    order = np.argsort(bi, kind="stable")
    bi = bi[order]
    logs = logs[order]
    uniq, starts = np.unique(bi, return_index=True)
    counts = np.diff(np.r_[starts, len(bi)])
    sums = np.add.reduceat(logs, starts, axis=0)
    means = sums / counts[:, None]
    return [
        BinOfDayStats(int(u), *(float(x) for x in row), int(cnt))
        for u, row, cnt in zip(uniq, means, counts)
    ]


def bin_of_day_average(bins: BinTable, sigma: np.ndarray, bin_index: int) -> BinOfDayStats:
    for stats in bin_of_day_table(bins, sigma):
        if stats.bin_index == bin_index:
            return stats
    raise ValueError(f"no qualifying day at bin_index {bin_index}")


# ---------------------------------------------------------------------------
# Invariants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InvariantSample:
    I: float                 # dollars
    I_rescaled: float        # dimensionless, NaN when C unknown
    W: float                 # dollars
    N: int
    C: float                 # dollars, NaN when unknown


def invariant_I(P: float, V: float, sigma: float, N: int, C: float = float("nan")) -> InvariantSample:
    """Exchanged risk W = P*V*sigma and its trade-count rescaling W/N^{3/2}."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if not (V > 0 and P > 0 and sigma >= 0):
        raise ValueError("require V > 0, P > 0, sigma >= 0")
    W = P * V * sigma
    I = W * N ** -1.5
    resc = I / C if C > 0 else float("nan")
    return InvariantSample(I=I, I_rescaled=resc, W=W, N=int(N), C=float(C))


def invariant_samples(bins: BinTable, sigma: np.ndarray) -> np.ndarray:
    """Per-(day, bin) invariant samples I = P*V*sigma/N^{3/2} over valid bins."""
    mask = _valid_mask(bins, sigma)
    return (bins.p[mask] * bins.v[mask] * np.asarray(sigma)[mask]
            * bins.n[mask].astype(float) ** -1.5)


def spread_cost(sq_samples) -> float:
    """Average spread cost C = log-mean of per-trade spread*size, dollars."""
    return log_mean(sq_samples)


def pooled_spread_cost(bins: BinTable) -> float:
    """Contract-level C pooled from per-bin log-mean spread costs.

    Bin SQ_mean is the within-bin geometric mean over trades, so the
    N-weighted log combination equals the trade-level log-mean exactly.
    """
    ok = (bins.n > 0) & np.isfinite(bins.sq_mean) & (bins.sq_mean > 0)
    if not np.any(ok):
        return float("nan")
    w = bins.n[ok].astype(float)
    return float(np.exp(np.sum(w * np.log(bins.sq_mean[ok])) / np.sum(w)))


def rescaled_invariant(I: float, C: float) -> float:
    """Dimensionless invariant I/C; C is the average spread cost."""
    if not C > 0:
        raise ValueError("spread cost C must be positive")
    return I / C
