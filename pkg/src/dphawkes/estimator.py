"""Moment inversion: recover (mu, alpha) from a bin-count mean and variance.

Solving the stationary mean equation for mu turns the 2-D system triangular:
mu(alpha) = eta_hat * (1 - alpha) / delta, leaving a single root-find in alpha
for the variance equation. The dispersion ratio sigma^2/eta grows with alpha,
so the objective is increasing on the bracket and bisection finds the unique
root; it is also derivative-free, which matters once the inputs carry Laplace
noise.
"""
from __future__ import annotations

from dataclasses import dataclass

from .counts import CountSeries, sample_stats
from .errors import NonConvergence
from .hawkes import HawkesParams, ParamBounds, theoretical_moments

# Fixed solver tolerances: far below Monte-Carlo noise at every relevant scale.
_RESIDUAL_RTOL = 1e-10
_BRACKET_WIDTH = 1e-12
_ALPHA_FLOOR = 1e-6


@dataclass(frozen=True)
class EstimateResult:
    mu_hat: float
    alpha_hat: float
    eta_hat: float
    sigma_sq_hat: float
    converged: bool
    iterations: int
    residual: float
    boundary: str | None = None      # "lower" when the root sits at the bracket edge
    outside_bounds: bool = False     # estimate escaped the prior box (never projected)
    epsilon_total: float | None = None
    gamma_total: float | None = None
    b_mode: str | None = None


def _variance_at(eta_hat: float, alpha: float, delta: float) -> float:
    mu = eta_hat * (1.0 - alpha) / delta
    return theoretical_moments(HawkesParams(mu, alpha), delta).sigma_sq


def invert_moments(eta_hat: float, sigma_sq_hat: float, delta: float,
                   bounds: ParamBounds) -> EstimateResult:
    """Find alpha_hat in the prior bracket, then mu_hat from the mean equation.

    Raises NonConvergence when the target variance is not reachable for any
    alpha in the bracket (e.g. a privatized variance at or below the mean);
    the failure is reported, never silently clamped.
    """
    if not eta_hat > 0:
        raise ValueError("eta_hat must be positive")
    if not delta > 0:
        raise ValueError("delta must be positive")

    lo = max(bounds.alpha_lower, _ALPHA_FLOOR)
    hi = bounds.alpha_upper

    def g(alpha: float) -> float:
        return _variance_at(eta_hat, alpha, delta) - sigma_sq_hat

    g_lo = g(lo)
    g_hi = g(hi)
    tol = _RESIDUAL_RTOL * abs(sigma_sq_hat)

    def result(alpha: float, iters: int, res: float, boundary: str | None) -> EstimateResult:
        mu_hat = eta_hat * (1.0 - alpha) / delta
        return EstimateResult(
            mu_hat=mu_hat, alpha_hat=alpha, eta_hat=eta_hat,
            sigma_sq_hat=sigma_sq_hat, converged=True, iterations=iters,
            residual=res, boundary=boundary,
            outside_bounds=not bounds.contains(mu_hat, alpha))

    if g_lo >= 0.0:
        # Root at or below the bracket edge. At the dispersion floor the data
        # look Poisson-like (alpha ~ 0); below the mean no alpha in (0,1) fits.
        if sigma_sq_hat >= eta_hat or abs(g_lo) <= tol:
            return result(lo, 0, g_lo, "lower")
        raise NonConvergence(
            f"variance {sigma_sq_hat:.6g} below mean {eta_hat:.6g}: "
            "no alpha in (0, 1) reproduces sub-mean dispersion")
    if g_hi < 0.0:
        if abs(g_hi) <= tol:
            return result(hi, 0, g_hi, "upper")
        raise NonConvergence(
            f"variance {sigma_sq_hat:.6g} exceeds the value attainable at "
            f"alpha_upper={hi}: no root in the bracket")

    iters = 0
    while hi - lo > _BRACKET_WIDTH:
        mid = 0.5 * (lo + hi)
        g_mid = g(mid)
        iters += 1
        if abs(g_mid) <= tol:
            return result(mid, iters, g_mid, None)
        if g_mid < 0.0:
            lo = mid
        else:
            hi = mid
    alpha = 0.5 * (lo + hi)
    return result(alpha, iters, g(alpha), None)


def estimate(series: CountSeries, bounds: ParamBounds) -> EstimateResult:
    """sample_stats followed by invert_moments."""
    stats = sample_stats(series)
    return invert_moments(stats.eta_hat, stats.sigma_sq_hat, series.delta, bounds)
