"""Log-log regression, empirical CCDFs, Hill tail exponents, rolling smoothing."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RegressionResult:
    slope: float
    intercept: float          # log10 units
    stderr_slope: float
    r2: float
    n_points: int


def loglog_regression(x, y) -> RegressionResult:
    """Equal-weight OLS of log10(y) on log10(x)."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D arrays of equal length")
    if len(x) < 3:
        raise ValueError("need at least 3 points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("all points must be positive")
    lx, ly = np.log10(x), np.log10(y)
    sxx = np.sum((lx - lx.mean()) ** 2)
    if sxx == 0:
        raise ValueError("degenerate x: all values equal")
    slope = float(np.sum((lx - lx.mean()) * (ly - ly.mean())) / sxx)
    intercept = float(ly.mean() - slope * lx.mean())
    resid = ly - (intercept + slope * lx)
    rss = float(np.sum(resid ** 2))
    tss = float(np.sum((ly - ly.mean()) ** 2))
    n = len(x)
    stderr = float(np.sqrt(rss / (n - 2) / sxx)) if n > 2 else float("nan")
    r2 = 1.0 if tss == 0 else 1.0 - rss / tss
    return RegressionResult(slope, intercept, stderr, float(r2), n)


class CCDF:
    """Empirical survival function P(X > x), right-continuous in x."""

    def __init__(self, samples):
        arr = np.sort(np.asarray(samples, float))
        if arr.size == 0:
            raise ValueError("need at least one sample")
        if np.any(~np.isfinite(arr)):
            raise ValueError("samples must be finite")
        self.values = np.unique(arr)
        # count strictly greater than each distinct value
        above = arr.size - np.searchsorted(arr, self.values, side="right")
        self.p = above / arr.size
        self.n_samples = int(arr.size)
        self._sorted = arr

    def __call__(self, x) -> np.ndarray | float:
        x = np.asarray(x, float)
        idx = np.searchsorted(self.values, x, side="right") - 1
        out = np.where(idx < 0, 1.0, self.p[np.maximum(idx, 0)])
        return float(out) if out.ndim == 0 else out

    def table(self) -> tuple[np.ndarray, np.ndarray]:
        """Plot form: ascending sorted samples with P(X >= x_i) = (n-i)/n.

        The first row is (min sample, 1.0); jumps match __call__ from the left.
        """
        n = self.n_samples
        return self._sorted.copy(), (n - np.arange(n)) / n

    def quantile_gt(self, prob: float) -> float:
        """Smallest sample value v with P(X > v) <= prob."""
        k = int(np.floor(prob * self.n_samples))      # allow k strictly greater
        desc = self._sorted[::-1]
        return float(desc[k])

    def rescaled(self, prob: float = 1e-3) -> "CCDF":
        """X-axis divided by the upper quantile x_prob with P(X > x_prob) = prob."""
        if self.n_samples < int(round(1.0 / prob)):
            raise ValueError(
                f"need at least {int(round(1.0 / prob))} samples to place the {prob:g} quantile")
        x0 = self.quantile_gt(prob)
        if x0 <= 0:
            raise ValueError("rescaling quantile must be positive")
        return CCDF(self._sorted / x0)


def ccdf(samples) -> CCDF:
    return CCDF(samples)


def rescale_ccdf(c: CCDF, prob: float = 1e-3) -> CCDF:
    return c.rescaled(prob)


@dataclass(frozen=True)
class TailFit:
    mu: float
    k: int                   # rank of the cutoff
    cutoff_value: float
    n_samples: int


def hill_tail_exponent(samples, cutoff_prob: float = 1e-2, k: int | None = None) -> TailFit:
    """Order-statistics tail exponent of P(X > x) ~ x^-mu.

    With descending order statistics X_0 >= X_1 >= ... and cutoff rank
    k = floor(cutoff_prob * n):  mu = [ (1/k) sum_{i<k} ln(X_i / X_k) ]^-1.
    """
    arr = np.sort(np.asarray(samples, float))[::-1]
    n = arr.size
    if n == 0 or np.any(~(arr > 0)):
        raise ValueError("samples must be positive")
    if k is None:
        k = int(np.floor(cutoff_prob * n))
    if k < 2:
        raise ValueError(f"cutoff rank k={k} too small; need n*cutoff_prob >= 2")
    if k >= n:
        raise ValueError(f"cutoff rank k={k} must be below n={n}")
    inv = np.mean(np.log(arr[:k] / arr[k]))
    return TailFit(mu=float(1.0 / inv), k=k, cutoff_value=float(arr[k]), n_samples=int(n))


def rolling_log_average(x, y, window: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Centred rolling mean of (log10 x, log10 y), for display only.

    Points are sorted by log x first; an even window is reduced by one so
    the window centres exactly. Endpoints shrink to the available
    half-windows.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("all points must be positive")
    if window < 1:
        raise ValueError("window must be >= 1")
    w = window if window % 2 == 1 else window - 1
    order = np.argsort(x, kind="stable")
    lx, ly = np.log10(x[order]), np.log10(y[order])
    n = len(lx)
    half = (w - 1) // 2
    idx = np.arange(n)
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + half + 1, n)
    cx = np.r_[0.0, np.cumsum(lx)]
    cy = np.r_[0.0, np.cumsum(ly)]
    cnt = hi - lo
    return 10 ** ((cx[hi] - cx[lo]) / cnt), 10 ** ((cy[hi] - cy[lo]) / cnt)
