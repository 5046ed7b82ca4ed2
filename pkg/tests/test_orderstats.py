import math

import numpy as np
import pytest

from brokenstick.orderstats import (
    FieldSizeHistogram,
    SegmentLaw,
    ccdf_inverse,
    ccdf_kth_largest,
    conditional_mean_given_win,
    mean_kth_largest,
    mixture,
    mixture_ccdf,
    partial_harmonic,
    pooled_conditional_mean_given_win,
    quantile_grid,
    second_moment_kth_largest,
    winner_segment_mean,
)
from rational_ccdf import (
    ccdf_compact_exact,
    ccdf_exact,
    mean_exact,
    second_moment_exact,
)


def test_partial_harmonic_values():
    assert partial_harmonic(1, 1) == 1.0
    assert partial_harmonic(2, 1) == 1.5
    assert partial_harmonic(8, 8) == 0.125
    assert partial_harmonic(3, 1) == pytest.approx(11 / 6, abs=1e-15)


@pytest.mark.parametrize("n,k", [(0, 1), (3, 0), (3, 4), (-1, 1), (2, -2)])
def test_rank_validation(n, k):
    for fn in (partial_harmonic, mean_kth_largest, second_moment_kth_largest,
               conditional_mean_given_win):
        with pytest.raises(ValueError):
            fn(n, k)
    with pytest.raises(ValueError):
        ccdf_kth_largest(n, k, 0.3)


def test_mean_values():
    assert mean_kth_largest(1, 1) == 1.0
    assert mean_kth_largest(2, 1) == 0.75
    assert mean_kth_largest(8, 1) == pytest.approx(0.3397321428571428, abs=1e-15)
    assert mean_kth_largest(9, 1) == pytest.approx(0.3143298059964726, abs=1e-15)


def test_second_moment_values():
    assert second_moment_kth_largest(1, 1) == 1.0
    assert second_moment_kth_largest(2, 1) == pytest.approx(7 / 12, abs=1e-15)
    assert second_moment_kth_largest(2, 2) == pytest.approx(1 / 12, abs=1e-15)
    total = sum(second_moment_kth_largest(3, k) for k in range(1, 4))
    assert total == pytest.approx(0.5, abs=1e-14)


def test_conditional_mean_values():
    assert conditional_mean_given_win(1, 1) == 1.0
    assert conditional_mean_given_win(2, 1) == pytest.approx(7 / 9, abs=1e-15)
    assert conditional_mean_given_win(2, 2) == pytest.approx(1 / 3, abs=1e-15)


def test_winner_segment_mean():
    assert winner_segment_mean(1) == 1.0
    assert winner_segment_mean(3) == 0.5
    assert winner_segment_mean(9) == pytest.approx(0.2, abs=1e-15)


@pytest.mark.parametrize("n", range(1, 16))
def test_normalization_identities(n):
    means = [mean_kth_largest(n, k) for k in range(1, n + 1)]
    seconds = [second_moment_kth_largest(n, k) for k in range(1, n + 1)]
    assert abs(sum(means) - 1.0) < 1e-12
    assert abs(sum(seconds) - 2.0 / (n + 1)) < 1e-12


@pytest.mark.parametrize("n", range(2, 16))
def test_mean_strictly_decreasing_in_rank(n):
    means = [mean_kth_largest(n, k) for k in range(1, n + 1)]
    assert all(a > b for a, b in zip(means, means[1:]))


@pytest.mark.parametrize("n", range(2, 16))
def test_size_bias_dominance(n):
    for k in range(1, n + 1):
        assert conditional_mean_given_win(n, k) > mean_kth_largest(n, k)


def test_moment_inequalities():
    for n in range(1, 12):
        for k in range(1, n + 1):
            m1 = mean_kth_largest(n, k)
            m2 = second_moment_kth_largest(n, k)
            assert m1 * m1 <= m2 <= m1


def test_ccdf_examples():
    assert ccdf_kth_largest(5, 3, 0.0) == 1.0
    assert ccdf_kth_largest(2, 1, 0.75) == pytest.approx(0.5, abs=1e-14)
    assert ccdf_kth_largest(3, 3, 0.2) == pytest.approx(0.16, abs=1e-14)
    assert ccdf_kth_largest(2, 1, 0.4) == 1.0


def test_ccdf_support_is_exact():
    for n, k in [(2, 1), (5, 2), (7, 7), (12, 4)]:
        assert ccdf_kth_largest(n, k, 1.0 / k) == 0.0
        assert ccdf_kth_largest(n, k, 1.0 / k + 0.1) == 0.0
        assert ccdf_kth_largest(n, k, 0.0) == 1.0
        assert ccdf_kth_largest(n, k, -0.5) == 1.0


def test_ccdf_clamps_out_of_range_x():
    assert ccdf_kth_largest(4, 1, 1.5) == 0.0
    assert ccdf_kth_largest(4, 1, -2.0) == 1.0
    with pytest.raises(ValueError):
        ccdf_kth_largest(4, 1, float("nan"))


@pytest.mark.parametrize("n,k", [(3, 2), (6, 1), (6, 6), (10, 4), (15, 8)])
def test_ccdf_monotone_nonincreasing(n, k):
    xs = np.linspace(-0.1, 1.0 / k + 0.1, 200)
    values = [ccdf_kth_largest(n, k, x) for x in xs]
    assert all(a >= b - 1e-12 for a, b in zip(values, values[1:]))
    assert all(0.0 <= v <= 1.0 for v in values)


def _ccdf_largest_reference(n, x):
    # independent specialization for k=1: survival of the maximum segment
    total = 0.0
    for ell in range(1, n + 1):
        base = 1.0 - ell * x
        if base <= 0.0:
            break
        total += (-1) ** (ell - 1) * math.comb(n, ell) * base ** (n - 1)
    return min(1.0, max(0.0, total))


def _ccdf_smallest_reference(n, x):
    # independent specialization for k=n: survival of the minimum segment
    base = 1.0 - n * x
    return base ** (n - 1) if base > 0.0 else 0.0


@pytest.mark.parametrize("n", range(1, 16))
def test_ccdf_largest_rank_specialization(n):
    xs = np.linspace(0.001, 1.0, 40)
    for x in xs:
        assert ccdf_kth_largest(n, 1, x) == pytest.approx(
            _ccdf_largest_reference(n, x), abs=5e-11
        )


@pytest.mark.parametrize("n", range(1, 16))
def test_ccdf_smallest_rank_specialization(n):
    xs = np.linspace(0.0005, 1.0 / n + 0.01, 40)
    for x in xs:
        assert ccdf_kth_largest(n, n, x) == pytest.approx(
            _ccdf_smallest_reference(n, x), abs=5e-9
        )


def test_ccdf_certified_by_exact_rational_evaluation():
    # the library's sum and two exact-rational evaluations (same structure
    # and an algebraically independent closed form) must agree tightly
    rng = np.random.default_rng(99)
    for n in range(1, 13):
        for k in range(1, n + 1):
            xs = list(rng.random(6) / k) + [0.5 / k, 1.0 / (k + 0.5)]
            for x in xs:
                x = float(x)
                exact = ccdf_exact(n, k, x)
                assert exact == ccdf_compact_exact(n, k, x)
                assert ccdf_kth_largest(n, k, x) == pytest.approx(
                    float(exact), abs=1e-10
                )


def test_ccdf_extended_precision_path():
    # n above the double-precision limit goes through mpmath
    rng = np.random.default_rng(7)
    for n in (25, 40, 64):
        for k in (1, 2, n // 2, n - 1, n):
            for x in rng.random(4) / k:
                x = float(x)
                exact = float(ccdf_compact_exact(n, k, x))
                assert ccdf_kth_largest(n, k, x) == pytest.approx(exact, abs=1e-13)


def test_moments_match_exact_rationals():
    for n in range(1, 13):
        for k in range(1, n + 1):
            assert mean_kth_largest(n, k) == pytest.approx(
                float(mean_exact(n, k)), abs=1e-14
            )
            assert second_moment_kth_largest(n, k) == pytest.approx(
                float(second_moment_exact(n, k)), abs=1e-14
            )


def test_ccdf_inverse_round_trip():
    for n, k in [(2, 1), (5, 2), (9, 9), (12, 3)]:
        for p in (0.9, 0.5, 0.1, 0.025):
            x = ccdf_inverse(n, k, p)
            assert ccdf_kth_largest(n, k, x) == pytest.approx(p, abs=1e-9)
    assert ccdf_inverse(5, 2, 1.0) == 0.0
    assert ccdf_inverse(5, 2, 0.0) == 0.5
    with pytest.raises(ValueError):
        ccdf_inverse(5, 2, 1.5)


def test_quantile_grid_sorted_and_interior():
    xs = quantile_grid(7, 2, 20)
    assert len(xs) == 20
    assert np.all(np.diff(xs) > 0)
    assert xs[0] > 0.0 and xs[-1] < 0.5


def test_segment_law_matches_free_functions():
    law = SegmentLaw(9)
    for k in range(1, 10):
        assert law.mean(k) == pytest.approx(mean_kth_largest(9, k), abs=1e-15)
        assert law.second_moment(k) == pytest.approx(
            second_moment_kth_largest(9, k), abs=1e-15
        )
        assert law.conditional_mean_given_win(k) == pytest.approx(
            conditional_mean_given_win(9, k), abs=1e-14
        )
    assert law.ccdf(3, 0.1) == ccdf_kth_largest(9, 3, 0.1)
    assert law.winner_segment_mean() == 0.2
    with pytest.raises(ValueError):
        law.mean(10)


class TestFieldSizeHistogram:
    def test_weights_sum_to_one(self):
        hist = FieldSizeHistogram({5: 3, 8: 1, 12: 6})
        weights = hist.weights()
        assert abs(sum(weights.values()) - 1.0) < 1e-12
        assert hist.total() == 10
        assert hist.support() == (5, 8, 12)

    def test_from_sizes(self):
        hist = FieldSizeHistogram.from_sizes([5, 5, 9])
        assert hist.counts == {5: 2, 9: 1}
        assert hist.mean_field_size() == pytest.approx(19 / 3)

    def test_zero_counts_dropped(self):
        hist = FieldSizeHistogram({5: 2, 7: 0})
        assert hist.support() == (5,)

    def test_invalid(self):
        with pytest.raises(ValueError):
            FieldSizeHistogram({0: 1})
        with pytest.raises(ValueError):
            FieldSizeHistogram({5: -1})
        with pytest.raises(ValueError):
            FieldSizeHistogram({}).weights()


class TestMixture:
    def test_degenerate(self):
        hist = FieldSizeHistogram({3: 1})
        assert mixture(hist, "winner_segment_mean") == 0.5

    def test_hand_evaluated_mean(self):
        hist = FieldSizeHistogram({2: 1, 3: 1})
        expected = (0.75 + (11 / 6) / 3) / 2  # = 49/72
        assert mixture(hist, "mean", k=1) == pytest.approx(expected, abs=1e-12)
        assert mixture(hist, "mean", k=1) == pytest.approx(0.680556, abs=5e-7)

    def test_longshot_selector_uses_rank_n(self):
        hist = FieldSizeHistogram({2: 1, 3: 1})
        expected = (mean_kth_largest(2, 2) + mean_kth_largest(3, 3)) / 2
        assert mixture(hist, "mean", k="longshot") == pytest.approx(expected, abs=1e-15)

    def test_fixed_rank_exceeding_support_names_offender(self):
        hist = FieldSizeHistogram({5: 1, 9: 1})
        with pytest.raises(ValueError, match="n=5"):
            mixture(hist, "mean", k=7)

    def test_empty_histogram_rejected(self):
        with pytest.raises(ValueError):
            mixture(FieldSizeHistogram({}), "mean", k=1)

    def test_unknown_statistic(self):
        with pytest.raises(ValueError):
            mixture(FieldSizeHistogram({3: 1}), "median", k=1)

    def test_ccdf_mixture(self):
        hist = FieldSizeHistogram({2: 1, 4: 3})
        x = 0.3
        expected = 0.25 * ccdf_kth_largest(2, 1, x) + 0.75 * ccdf_kth_largest(4, 1, x)
        assert mixture(hist, "ccdf", k=1, x=x) == pytest.approx(expected, abs=1e-14)
        curve = mixture_ccdf(hist, 1, [0.0, x, 1.0])
        assert curve[0] == 1.0
        assert curve[1] == pytest.approx(expected, abs=1e-14)
        assert curve[2] == 0.0
        with pytest.raises(ValueError):
            mixture(hist, "ccdf", k=1)

    def test_pooled_conditional_mean(self):
        # degenerate mixture: pooled and per-n conditional means coincide
        hist = FieldSizeHistogram({6: 4})
        assert pooled_conditional_mean_given_win(hist, 2) == pytest.approx(
            conditional_mean_given_win(6, 2), abs=1e-15
        )
        # mixed field sizes: pooled is the size-biased ratio of mixtures
        hist = FieldSizeHistogram({2: 1, 3: 1})
        expected = mixture(hist, "second_moment", k=1) / mixture(hist, "mean", k=1)
        assert pooled_conditional_mean_given_win(hist, 1) == pytest.approx(
            expected, abs=1e-15
        )
