"""Moment recovery by adaptive quadrature of the segment survival function.

The survival function of the k-th largest segment is piecewise polynomial
with kinks where a positive-part kernel switches off, i.e. at x = 1/m for
m = k..n.  Splitting the integration range at those kinks leaves a smooth
polynomial on each piece, which the Gauss-Kronrod rule in
``scipy.integrate.quad`` integrates essentially exactly.  These integrals
provide an independent cross-check of the closed-form harmonic moments:

    E[z_(k)]   = integral of   P[z_(k) > x]       over [0, 1/k]
    E[z_(k)^2] = integral of 2 x P[z_(k) > x]     over [0, 1/k]
"""

from __future__ import annotations

from scipy.integrate import quad

from .orderstats import _check_rank, ccdf_kth_largest

__all__ = ["integrate_survival", "mean_via_quadrature", "second_moment_via_quadrature"]


def _kink_points(n: int, k: int) -> list[float]:
    """Panel boundaries 0 < 1/n < 1/(n-1) < ... < 1/k of the support."""
    return [0.0] + [1.0 / m for m in range(n, k - 1, -1)]


def integrate_survival(n: int, k: int, *, weight_power: int = 0, tol: float = 1e-10) -> float:
    """Integrate x**weight_power * P[z_(k) > x] over the support [0, 1/k]."""
    _check_rank(n, k)
    points = _kink_points(n, k)
    budget = tol / (len(points) - 1)

    def integrand(x: float) -> float:
        s = ccdf_kth_largest(n, k, x)
        return s if weight_power == 0 else x**weight_power * s

    total = 0.0
    for lo, hi in zip(points[:-1], points[1:]):
        piece, _ = quad(integrand, lo, hi, epsabs=budget, epsrel=1e-12, limit=200)
        total += piece
    return total


def mean_via_quadrature(n: int, k: int, tol: float = 1e-10) -> float:
    """E[z_(k)] recovered from the survival function."""
    return integrate_survival(n, k, weight_power=0, tol=tol)


def second_moment_via_quadrature(n: int, k: int, tol: float = 1e-10) -> float:
    """E[z_(k)^2] recovered as the integral of 2 x * survival."""
    return 2.0 * integrate_survival(n, k, weight_power=1, tol=tol)
