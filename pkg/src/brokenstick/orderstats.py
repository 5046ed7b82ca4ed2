"""Closed-form order statistics of a unit interval broken at uniform random cuts.

Cutting [0, 1] at n-1 independent uniform points yields n segments whose
sorted lengths z_(1) >= ... >= z_(n) have fully explicit laws:

  survival      P[z_(k) > x]  via an alternating inclusion-exclusion sum over
                the positive-part kernel [1 - m*x]_+^(n-1)
  first moment  E[z_(k)]   = H(n, k) / n        with H(n, k) = sum_{j=k}^n 1/j
  second moment E[z_(k)^2] = 2 / (n (n+1)) * sum_{j=k}^n H(n, j) / j

The size-biased (conditional-on-win) mean E[z_(k) | segment contains a
uniform random point] equals E[z_(k)^2] / E[z_(k)], and the mean length of
the segment containing the point is 2 / (n + 1).

The alternating sums lose precision as n grows: terms up to ~3^n cancel to a
probability.  Up to ``_FLOAT_MAX_N`` segments they are evaluated in double
precision with compensated (Kahan) summation; beyond that the evaluation
switches to mpmath with enough working digits to absorb the cancellation,
and the result is clamped to [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import mpmath
import numpy as np

__all__ = [
    "FieldSizeHistogram",
    "SegmentLaw",
    "ccdf_inverse",
    "ccdf_kth_largest",
    "ccdf_kth_largest_grid",
    "conditional_mean_given_win",
    "mean_kth_largest",
    "mixture",
    "mixture_ccdf",
    "partial_harmonic",
    "pooled_conditional_mean_given_win",
    "second_moment_kth_largest",
    "winner_segment_mean",
]

# Largest n evaluated in plain double precision; above this the alternating
# survival sum cancels catastrophically and mpmath takes over.
_FLOAT_MAX_N = 20


def _check_field_size(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
        raise ValueError(f"field size must be a positive integer, got {n!r}")


def _check_rank(n: int, k: int) -> None:
    _check_field_size(n)
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool) or not 1 <= k <= n:
        raise ValueError(f"rank k={k!r} out of range for field size n={n}")


def partial_harmonic(n: int, k: int) -> float:
    """Tail of the harmonic series, H(n, k) = sum_{j=k}^{n} 1/j."""
    _check_rank(n, k)
    total = 0.0
    for j in range(n, k - 1, -1):  # ascending magnitude for accuracy
        total += 1.0 / j
    return total


def mean_kth_largest(n: int, k: int) -> float:
    """Expected length of the k-th largest segment, H(n, k) / n."""
    return partial_harmonic(n, k) / n


def second_moment_kth_largest(n: int, k: int) -> float:
    """E[z_(k)^2] = 2 / (n (n+1)) * sum_{j=k}^{n} H(n, j) / j."""
    _check_rank(n, k)
    total = 0.0
    h = 0.0
    for j in range(n, k - 1, -1):
        h += 1.0 / j  # h == H(n, j) once j is reached from above
        total += h / j
    return 2.0 * total / (n * (n + 1))


def conditional_mean_given_win(n: int, k: int) -> float:
    """Size-biased mean E[z_(k) | a uniform point lands in the k-th segment].

    Equals E[z_(k)^2] / E[z_(k)]; strictly above the plain mean whenever the
    segment length is nondegenerate (n >= 2).
    """
    return second_moment_kth_largest(n, k) / mean_kth_largest(n, k)


def winner_segment_mean(n: int) -> float:
    """Mean length of the segment containing a uniform random point: 2/(n+1)."""
    _check_field_size(n)
    return 2.0 / (n + 1)


def _ccdf_terms_float(n: int, k: int, x: float) -> float:
    # Inclusion-exclusion survival sum, Kahan-compensated.  Terms vanish once
    # the kernel multiplier m satisfies m*x >= 1, and multipliers only grow,
    # so every loop breaks early.
    total = 0.0
    comp = 0.0

    def add(term: float) -> None:
        nonlocal total, comp
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t

    p = n - 1
    for j in range(1, k):
        if j * x >= 1.0:
            break
        cj = float(math.comb(n, j))
        for ell in range(0, n - j + 1):
            if (j + ell) * x >= 1.0:
                break
            kernel = (1.0 - (j + ell) * x) ** p
            term = cj * math.comb(n - j, ell) * kernel
            add(term if (ell % 2 == 1) else -term)
    for ell in range(1, n + 1):
        if ell * x >= 1.0:
            break
        kernel = (1.0 - ell * x) ** p
        term = math.comb(n, ell) * kernel
        add(term if (ell % 2 == 1) else -term)
    return total


def _ccdf_terms_mp(n: int, k: int, x: float) -> float:
    # Same sum in software extended precision; digits scale with the ~3^n
    # worst-case term magnitude so the cancelled result keeps ~25 digits.
    digits = 25 + int(math.ceil(0.48 * n))
    with mpmath.workdps(digits):
        xm = mpmath.mpf(x)
        total = mpmath.mpf(0)
        p = n - 1
        for j in range(1, k):
            if j * x >= 1.0:
                break
            cj = math.comb(n, j)
            inner = mpmath.mpf(0)
            for ell in range(0, n - j + 1):
                if (j + ell) * x >= 1.0:
                    break
                term = math.comb(n - j, ell) * (1 - (j + ell) * xm) ** p
                inner += term if (ell % 2 == 1) else -term
            total += cj * inner
        for ell in range(1, n + 1):
            if ell * x >= 1.0:
                break
            term = math.comb(n, ell) * (1 - ell * xm) ** p
            total += term if (ell % 2 == 1) else -term
        return float(total)


def ccdf_kth_largest(n: int, k: int, x: float) -> float:
    """Survival probability P[z_(k) > x] of the k-th largest segment.

    x outside [0, 1] is clamped rather than rejected: any x <= 0 returns 1
    and any x >= 1/k returns 0 exactly (k segments of length > 1/k cannot
    fit in the unit interval).  The result is clamped to [0, 1].
    """
    _check_rank(n, k)
    x = float(x)
    if math.isnan(x):
        raise ValueError("x must not be NaN")
    if x <= 0.0:
        return 1.0
    if k * x >= 1.0:
        return 0.0
    if n <= _FLOAT_MAX_N:
        value = _ccdf_terms_float(n, k, x)
    else:
        value = _ccdf_terms_mp(n, k, x)
    return min(1.0, max(0.0, value))


def ccdf_kth_largest_grid(n: int, k: int, xs: Sequence[float]) -> np.ndarray:
    """Vectorized ``ccdf_kth_largest`` over a grid of points."""
    return np.array([ccdf_kth_largest(n, k, x) for x in np.asarray(xs, dtype=float)])


def quantile_grid(n: int, k: int, count: int = 20) -> np.ndarray:
    """Ascending grid of x values hitting equally spaced survival levels.

    The survival probabilities at the returned points are approximately
    (count - 0.5)/count down to 0.5/count, keeping every point well inside
    the distribution's bulk (useful for Monte Carlo comparisons, where the
    binomial standard error degenerates near survival 0 or 1).
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    levels = (np.arange(count) + 0.5) / count
    return np.array(sorted(ccdf_inverse(n, k, p) for p in levels))


def ccdf_inverse(n: int, k: int, p: float) -> float:
    """Smallest x with P[z_(k) > x] <= p, by bisection on [0, 1/k]."""
    _check_rank(n, k)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability p={p!r} out of [0, 1]")
    if p >= 1.0:
        return 0.0
    if p <= 0.0:
        return 1.0 / k
    lo, hi = 0.0, 1.0 / k
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if ccdf_kth_largest(n, k, mid) > p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class SegmentLaw:
    """All order-statistic quantities for a fixed number of segments n.

    Precomputes the harmonic tails once so per-rank lookups are O(1).
    Instances are immutable and safe to share across threads.
    """

    def __init__(self, n: int):
        _check_field_size(n)
        self.n = int(n)
        means = np.empty(self.n)
        second = np.empty(self.n)
        h = 0.0
        acc = 0.0
        for j in range(self.n, 0, -1):
            h += 1.0 / j
            acc += h / j
            means[j - 1] = h / self.n
            second[j - 1] = 2.0 * acc / (self.n * (self.n + 1))
        self._means = means
        self._second = second

    def _rank_index(self, k: int) -> int:
        _check_rank(self.n, k)
        return int(k) - 1

    def mean(self, k: int) -> float:
        return float(self._means[self._rank_index(k)])

    def second_moment(self, k: int) -> float:
        return float(self._second[self._rank_index(k)])

    def conditional_mean_given_win(self, k: int) -> float:
        i = self._rank_index(k)
        return float(self._second[i] / self._means[i])

    def ccdf(self, k: int, x: float) -> float:
        return ccdf_kth_largest(self.n, k, x)

    def winner_segment_mean(self) -> float:
        return 2.0 / (self.n + 1)

    def means(self) -> np.ndarray:
        """Expected lengths for ranks 1..n (copy)."""
        return self._means.copy()

    def second_moments(self) -> np.ndarray:
        return self._second.copy()

    def __repr__(self) -> str:  # pragma: no cover
        return f"SegmentLaw(n={self.n})"


@dataclass(frozen=True)
class FieldSizeHistogram:
    """Race counts per field size, the weights for every mixture average."""

    counts: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        clean: dict[int, int] = {}
        for n, count in dict(self.counts).items():
            n = int(n)
            _check_field_size(n)
            if count < 0 or int(count) != count:
                raise ValueError(f"count for n={n} must be a nonnegative integer, got {count!r}")
            if count:
                clean[n] = int(count)
        object.__setattr__(self, "counts", clean)

    @classmethod
    def from_sizes(cls, sizes) -> "FieldSizeHistogram":
        counts: dict[int, int] = {}
        for n in sizes:
            counts[int(n)] = counts.get(int(n), 0) + 1
        return cls(counts)

    def total(self) -> int:
        return sum(self.counts.values())

    def support(self) -> tuple[int, ...]:
        return tuple(sorted(self.counts))

    def weights(self) -> dict[int, float]:
        """Normalized weights w_n = count(n) / total; requires total > 0."""
        total = self.total()
        if total == 0:
            raise ValueError("histogram is empty: no races to average over")
        return {n: self.counts[n] / total for n in self.support()}

    def mean_field_size(self) -> float:
        weights = self.weights()
        return sum(n * w for n, w in weights.items())

    def __len__(self) -> int:
        return len(self.counts)


_RANK_STATISTICS = ("mean", "second_moment", "conditional_mean_given_win", "ccdf")
STATISTICS = _RANK_STATISTICS + ("winner_segment_mean",)


def _resolve_rank(n: int, k, *, statistic: str) -> int:
    if k == "longshot":
        return n
    if k is None:
        raise ValueError(f"statistic {statistic!r} needs a rank k (or 'longshot')")
    if k > n:
        raise ValueError(
            f"rank k={k} exceeds field size n={n} present in the histogram support"
        )
    return int(k)


def mixture(hist: FieldSizeHistogram, statistic: str, *, k=None, x: float | None = None) -> float:
    """Field-size weighted average of a per-n statistic.

    ``statistic`` is one of ``STATISTICS``.  ``k`` is a fixed rank or the
    string ``"longshot"`` (rank n within each field size); it is ignored for
    ``winner_segment_mean``.  ``x`` is required for ``ccdf``.
    """
    if statistic not in STATISTICS:
        raise ValueError(f"unknown statistic {statistic!r}; choose from {STATISTICS}")
    weights = hist.weights()
    if statistic == "winner_segment_mean":
        return sum(w * winner_segment_mean(n) for n, w in weights.items())
    if statistic == "ccdf":
        if x is None:
            raise ValueError("statistic 'ccdf' needs an evaluation point x")
        return sum(
            w * ccdf_kth_largest(n, _resolve_rank(n, k, statistic=statistic), x)
            for n, w in weights.items()
        )
    fn = {
        "mean": mean_kth_largest,
        "second_moment": second_moment_kth_largest,
        "conditional_mean_given_win": conditional_mean_given_win,
    }[statistic]
    return sum(w * fn(n, _resolve_rank(n, k, statistic=statistic)) for n, w in weights.items())


def mixture_ccdf(hist: FieldSizeHistogram, k, xs: Sequence[float]) -> np.ndarray:
    """Mixture survival curve sum_n w_n P[z_(k(n)) > x] on a grid."""
    weights = hist.weights()
    xs = np.asarray(xs, dtype=float)
    out = np.zeros_like(xs)
    for n, w in weights.items():
        rank = _resolve_rank(n, k, statistic="ccdf")
        out += w * ccdf_kth_largest_grid(n, rank, xs)
    return out


def pooled_conditional_mean_given_win(hist: FieldSizeHistogram, k) -> float:
    """Size-biased mean of the k-th segment under the field-size mixture.

    Race data pooled across field sizes estimates this ratio of mixtures,
    sum_n w_n E[z_(k)^2] / sum_n w_n E[z_(k)]: conditioning on a win tilts
    the field-size weights toward sizes where rank k wins more often.
    Averaging the per-n conditional means instead (``mixture`` with
    ``conditional_mean_given_win``) gives a systematically smaller number.
    """
    num = mixture(hist, "second_moment", k=k)
    den = mixture(hist, "mean", k=k)
    return num / den
