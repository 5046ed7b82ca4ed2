import pytest

from brokenstick.orderstats import mean_kth_largest, second_moment_kth_largest
from brokenstick.quadrature import (
    integrate_survival,
    mean_via_quadrature,
    second_moment_via_quadrature,
)


@pytest.mark.parametrize("n,k", [(1, 1), (2, 1), (2, 2), (5, 3), (9, 1), (12, 7), (15, 15)])
def test_moments_recovered_from_survival(n, k):
    assert mean_via_quadrature(n, k) == pytest.approx(mean_kth_largest(n, k), abs=1e-8)
    assert second_moment_via_quadrature(n, k) == pytest.approx(
        second_moment_kth_largest(n, k), abs=1e-8
    )


def test_known_closed_forms_at_n2():
    # E[max(U, 1-U)] = 3/4, E[max^2] = 7/12, E[min] = 1/4, E[min^2] = 1/12
    assert mean_via_quadrature(2, 1) == pytest.approx(0.75, abs=1e-10)
    assert second_moment_via_quadrature(2, 1) == pytest.approx(7 / 12, abs=1e-10)
    assert mean_via_quadrature(2, 2) == pytest.approx(0.25, abs=1e-10)
    assert second_moment_via_quadrature(2, 2) == pytest.approx(1 / 12, abs=1e-10)


def test_extends_past_double_precision_limit():
    # the integrand switches to the extended-precision survival path
    n = 24
    assert mean_via_quadrature(n, 2) == pytest.approx(mean_kth_largest(n, 2), abs=1e-8)


def test_rank_validation():
    with pytest.raises(ValueError):
        integrate_survival(3, 4)
