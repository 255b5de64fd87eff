"""Distribution measurement: histograms, entropy, Gini, Gamma moment fits,
power-law tail estimation, KS distances and CCDF export.

All functions are pure and operate on immutable views of the input, so
they are safe to call concurrently from ensemble reductions.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np


class DegenerateSampleError(ValueError):
    """Raised when a fit needs spread but the sample has none."""


@dataclass
class Histogram:
    """Binned density estimate with its normalization metadata.

    `total` counts only the binned samples; zeros set aside under
    logarithmic binning land in `zero_count`, and samples falling outside
    an explicitly requested span land in `out_of_range`.  Neither group is
    silently dropped, but neither enters the density normalization.
    """

    edges: np.ndarray       # length n_bins + 1, strictly increasing
    counts: np.ndarray      # int64, length n_bins
    total: int
    mode: str               # "linear" or "logarithmic"
    zero_count: int = 0
    out_of_range: int = 0

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def density(self) -> np.ndarray:
        """Per-bin density: counts / (total * width); integrates to 1."""
        return self.counts / (self.total * self.widths)


def histogram(samples, n_bins: int, mode="linear", span=None) -> Histogram:
    """Bin non-negative samples into a density estimate.

    Linear edges span [0, max] (or the explicit `span`); logarithmic edges
    span [smallest positive sample, max] and report zeros separately in
    the zero_count side channel.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise ValueError("samples must be non-empty")
    if n_bins < 2:
        raise ValueError("n_bins must be at least 2")
    if (x < 0).any():
        raise ValueError("samples must be non-negative")
    if mode not in ("linear", "logarithmic"):
        raise ValueError("mode must be 'linear' or 'logarithmic'")

    zero_count = 0
    if mode == "linear":
        if span is None:
            hi = float(x.max())
            if hi <= 0.0:
                raise ValueError("samples must include a positive value")
            lo = 0.0
        else:
            lo, hi = float(span[0]), float(span[1])
            if not lo < hi:
                raise ValueError("span must be an increasing pair")
        edges = np.linspace(lo, hi, n_bins + 1)
        binnable = x
    else:
        positive = x[x > 0]
        zero_count = int(x.size - positive.size)
        if positive.size == 0:
            raise ValueError("logarithmic binning needs positive samples")
        if span is None:
            lo = float(positive.min())
            hi = float(positive.max())
        else:
            lo, hi = float(span[0]), float(span[1])
            if lo <= 0.0:
                raise ValueError("logarithmic span must be positive")
        if not lo < hi:
            raise ValueError("samples must span more than one value")
        edges = np.geomspace(lo, hi, n_bins + 1)
        binnable = positive

    counts, _ = np.histogram(binnable, bins=edges)
    counts = counts.astype(np.int64)
    total = int(counts.sum())
    out_of_range = int(binnable.size - total)
    return Histogram(edges, counts, total, mode, zero_count, out_of_range)


def shannon_entropy(h: Histogram) -> float:
    """Plug-in differential entropy (nats) of the binned density.

    Empty bins contribute nothing.  Comparisons are only meaningful at
    identical binning; the plug-in bias cancels there.
    """
    if h.total <= 0:
        raise ValueError("histogram is empty")
    p = h.counts / h.total
    occupied = p > 0
    p = p[occupied]
    w = h.widths[occupied]
    return float(-np.sum(p * np.log(p / w)))


def gini(samples) -> float:
    """Inequality index in [0, 1): 0 for perfect equality, 1/2 for an
    exponential population.  Sorted-sample O(n log n) identity, equivalent
    to the mean absolute pairwise difference over twice the mean."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise ValueError("samples must be non-empty")
    if (x < 0).any():
        raise ValueError("samples must be non-negative")
    s = float(x.sum())
    if s <= 0.0:
        raise ValueError("samples must not be all zero")
    n = x.size
    xs = np.sort(x, kind="stable")
    ranks = np.arange(1, n + 1, dtype=np.float64)
    return float(2.0 * float(np.sum(ranks * xs)) / (n * s) - (n + 1) / n)


@dataclass
class GammaFit:
    """Method-of-moments Gamma parameters; shape * scale is the sample mean."""

    shape: float
    scale: float

    @property
    def mean(self) -> float:
        return self.shape * self.scale


def fit_gamma_moments(samples) -> GammaFit:
    """Gamma fit from the first two moments: shape = mean^2 / variance,
    scale = variance / mean (population variance, ddof=0)."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size < 2:
        raise ValueError("need at least 2 samples")
    mean = float(x.mean())
    if mean <= 0.0:
        raise ValueError("sample mean must be positive")
    var = float(x.var())
    if var <= 0.0:
        raise DegenerateSampleError("sample variance is zero")
    return GammaFit(shape=mean * mean / var, scale=var / mean)


@dataclass(frozen=True)
class TailFit:
    """Power-law tail estimate with the exponent convention pinned.

    exponent_ccdf is the index of the survival function, P(X > x) ~
    x**(-exponent_ccdf); the density exponent exceeds it by exactly one.
    """

    exponent_ccdf: float
    top_fraction: float
    k_used: int
    stderr: float

    @property
    def exponent_pdf(self) -> float:
        return self.exponent_ccdf + 1.0


def hill_tail(samples, top_fraction) -> TailFit:
    """Hill estimate of the tail index from the k = floor(f * n) largest
    samples: k / sum(log(x_(i) / x_(k+1))), with stderr = estimate / sqrt(k)."""
    x = np.asarray(samples, dtype=np.float64)
    f = float(top_fraction)
    if not 0.0 < f < 1.0:
        raise ValueError("top_fraction must lie in (0,1)")
    n = x.size
    k = int(math.floor(f * n))
    if k < 10:
        raise ValueError(f"top fraction keeps {k} samples, need at least 10")
    xs = np.sort(x)[::-1]
    threshold = xs[k]       # the (k+1)-th largest order statistic
    if threshold <= 0.0:
        raise ValueError("tail threshold must be positive")
    log_excess = float(np.sum(np.log(xs[:k] / threshold)))
    if log_excess <= 0.0:
        raise DegenerateSampleError("tail order statistics have no spread")
    alpha = k / log_excess
    return TailFit(exponent_ccdf=alpha, top_fraction=f, k_used=k,
                   stderr=alpha / math.sqrt(k))


def hill_no_plateau(samples, fractions=(0.10, 0.05, 0.02)) -> bool:
    """True when Hill estimates across top fractions disagree beyond noise.

    A genuine power tail gives stable estimates as the fraction shrinks; a
    light tail (e.g. exponential) drifts.  Any pair of estimates differing
    by more than 3 combined standard errors flags the drift.
    """
    fits = [hill_tail(samples, f) for f in fractions]
    for a, b in itertools.combinations(fits, 2):
        if abs(a.exponent_ccdf - b.exponent_ccdf) > 3.0 * math.hypot(a.stderr, b.stderr):
            return True
    return False


def ks_distance(samples, cdf) -> float:
    """Sup distance between the empirical CDF and a model CDF callable.

    The callable should accept a sorted array; scalar-only callables are
    mapped element by element as a fallback.
    """
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = x.size
    if n == 0:
        raise ValueError("samples must be non-empty")
    f = np.asarray(cdf(x), dtype=np.float64)
    if f.shape != x.shape:
        f = np.asarray([cdf(v) for v in x], dtype=np.float64)
    above = np.arange(1, n + 1) / n - f
    below = f - np.arange(0, n) / n
    return float(max(above.max(), below.max()))


def ks_two_sample(a, b) -> float:
    """Sup distance between two empirical CDFs."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise ValueError("samples must be non-empty")
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / a.size
    cdf_b = np.searchsorted(b, grid, side="right") / b.size
    return float(np.abs(cdf_a - cdf_b).max())


def ccdf_points(samples):
    """Empirical survival points for log-log tail plots.

    Returns (values, tail_probs): distinct sample values sorted descending
    and, for each, the fraction of samples at or above it.  The smallest
    value always carries probability 1.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise ValueError("samples must be non-empty")
    vals = np.sort(x)[::-1]
    n = x.size
    tail = np.arange(1, n + 1, dtype=np.float64) / n
    keep = np.empty(n, dtype=bool)
    keep[:-1] = vals[1:] != vals[:-1]   # last slot of each run of equal values
    keep[-1] = True
    return vals[keep], tail[keep]
