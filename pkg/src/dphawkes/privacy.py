"""Sensitivities, Laplace noise, and the private release of the bin statistics.

Neighboring sequences differ by one tree of events, so the sensitivity of the
sample statistics is driven by the largest tree: either a known cap B
(relation-aware) or the probabilistic 3*log(T)/(1-alpha_upper)^2 progeny bound
(relation-unaware), which requires the horizon threshold checked by
validate_horizon. Budgets here are per statistic; the released pair composes
to twice the per-statistic epsilon.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .counts import CountSeries, SampleStats, sample_stats
from .errors import HorizonTooShort
from .estimator import EstimateResult, invert_moments
from .hawkes import ParamBounds
from .rng import as_generator

RELATION_AWARE = "relation_aware"
RELATION_UNAWARE = "relation_unaware"


@dataclass(frozen=True)
class PrivacyBudget:
    """Per-statistic epsilon and random-DP failure probability gamma."""

    epsilon: float
    gamma: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not 0 < self.gamma <= 0.5:
            raise ValueError("gamma must lie in (0, 1/2]")


def c1_constant(bounds: ParamBounds, gamma: float) -> float:
    return math.sqrt(1.1 * bounds.mu_upper / ((1.0 - bounds.alpha_upper) ** 3 * gamma))


def c2_constant(bounds: ParamBounds) -> float:
    return 3.0 / (1.0 - bounds.alpha_upper) ** 2


@dataclass(frozen=True)
class SensitivitySpec:
    """Adjacency mode plus the constants derived from the prior box and gamma.

    The same user-supplied gamma feeds c1 and the horizon threshold.
    mu_upper and gamma are retained for the relation-unaware horizon check.
    """

    mode: str
    c1: float
    c2: float
    b: int | None
    mu_upper: float
    gamma: float

    @classmethod
    def relation_aware(cls, bounds: ParamBounds, gamma: float, b: int) -> "SensitivitySpec":
        # b = 0 is the degenerate identical-sequences case (zero sensitivity)
        if not b >= 0:
            raise ValueError("b must be a nonnegative integer")
        return cls(mode=RELATION_AWARE, c1=c1_constant(bounds, gamma),
                   c2=c2_constant(bounds), b=int(b),
                   mu_upper=bounds.mu_upper, gamma=gamma)

    @classmethod
    def relation_unaware(cls, bounds: ParamBounds, gamma: float) -> "SensitivitySpec":
        return cls(mode=RELATION_UNAWARE, c1=c1_constant(bounds, gamma),
                   c2=c2_constant(bounds), b=None,
                   mu_upper=bounds.mu_upper, gamma=gamma)


def tree_bound(alpha_upper: float, horizon: float) -> float:
    """Largest-progeny cap 3*log(T)/(1-alpha)^2; valid past validate_horizon."""
    return 3.0 * math.log(horizon) / (1.0 - alpha_upper) ** 2


def validate_horizon(mu_upper: float, gamma: float, horizon: float) -> bool:
    return horizon >= (mu_upper * math.e**2 / gamma) ** 2.5


def mean_sensitivity(spec: SensitivitySpec, k: int, horizon: float) -> float:
    if k < 2:
        raise ValueError("k must be at least 2")
    if spec.mode == RELATION_AWARE:
        return spec.b / k
    return spec.c2 * math.log(horizon) / k


def variance_sensitivity(spec: SensitivitySpec, k: int, delta: float, horizon: float) -> float:
    if k < 2:
        raise ValueError("k must be at least 2")
    if not delta > 0:
        raise ValueError("delta must be positive")
    if spec.mode == RELATION_AWARE:
        b = spec.b
        return b**2 / k + 2.0 * b**1.5 * math.sqrt(delta) * spec.c1 / (k - 1)
    log_t = math.log(horizon)
    numerator = (spec.c2**2 * log_t**2
                 + 2.0 * spec.c2**1.5 * spec.c1 * (k / (k - 1)) * log_t**1.5 * math.sqrt(delta))
    return numerator / k


def laplace_sample(scale: float, rng: int | np.random.Generator) -> float:
    """One zero-mean Laplace draw by inverse CDF of a single uniform.

    Sign from u < 1/2, magnitude -scale*log(1 - 2|u - 1/2|): reproducible from
    the raw uniform stream. scale 0 is allowed and returns 0 (a draw is still
    consumed so the stream position does not depend on the scale).
    """
    if scale < 0:
        raise ValueError("scale must be nonnegative")
    rng = as_generator(rng)
    u = float(rng.random())
    if scale == 0.0:
        return 0.0
    magnitude = -scale * math.log(max(1.0 - 2.0 * abs(u - 0.5), 5e-324))
    return -magnitude if u < 0.5 else magnitude


def laplace_samples(scale: float, rng: int | np.random.Generator, size: int) -> np.ndarray:
    """Vectorized draws; one uniform per sample, same map as laplace_sample."""
    if scale < 0:
        raise ValueError("scale must be nonnegative")
    rng = as_generator(rng)
    u = rng.random(size)
    if scale == 0.0:
        return np.zeros(size)
    magnitude = -scale * np.log(np.maximum(1.0 - 2.0 * np.abs(u - 0.5), 5e-324))
    return np.where(u < 0.5, -magnitude, magnitude)


def privatize_stats(stats: SampleStats, spec: SensitivitySpec, budget: PrivacyBudget,
                    delta: float, horizon: float,
                    seed: int | np.random.Generator) -> SampleStats:
    """Laplace mechanism on the sample mean and variance (two independent draws).

    Raises HorizonTooShort in relation-unaware mode when the horizon is below
    the progeny-bound threshold (the bound is vacuous there). The returned pair
    carries total budget 2*epsilon by composition.
    """
    if spec.mode == RELATION_UNAWARE and not validate_horizon(spec.mu_upper, spec.gamma, horizon):
        threshold = (spec.mu_upper * math.e**2 / spec.gamma) ** 2.5
        raise HorizonTooShort(
            f"horizon {horizon:.6g} below relation-unaware threshold {threshold:.6g}")
    rng = as_generator(seed)
    mean_scale = mean_sensitivity(spec, stats.k, horizon) / budget.epsilon
    var_scale = variance_sensitivity(spec, stats.k, delta, horizon) / budget.epsilon
    eta_priv = stats.eta_hat + laplace_sample(mean_scale, rng)
    var_priv = stats.sigma_sq_hat + laplace_sample(var_scale, rng)
    return SampleStats(eta_hat=eta_priv, sigma_sq_hat=var_priv, k=stats.k)


def private_estimate(series: CountSeries, bounds: ParamBounds, spec: SensitivitySpec,
                     budget: PrivacyBudget, seed: int | np.random.Generator) -> EstimateResult:
    """privatize_stats then invert_moments, labeled with the composed budget.

    Relation-aware release composes to (gamma, 2*epsilon) random-DP;
    relation-unaware to (2*gamma, 2*epsilon).
    """
    stats = sample_stats(series)
    priv = privatize_stats(stats, spec, budget, series.delta, series.horizon, seed)
    result = invert_moments(priv.eta_hat, priv.sigma_sq_hat, series.delta, bounds)
    gamma_total = budget.gamma if spec.mode == RELATION_AWARE else 2.0 * budget.gamma
    b_mode = str(spec.b) if spec.mode == RELATION_AWARE else "auto"
    return EstimateResult(
        mu_hat=result.mu_hat, alpha_hat=result.alpha_hat, eta_hat=result.eta_hat,
        sigma_sq_hat=result.sigma_sq_hat, converged=result.converged,
        iterations=result.iterations, residual=result.residual,
        boundary=result.boundary, outside_bounds=result.outside_bounds,
        epsilon_total=2.0 * budget.epsilon, gamma_total=gamma_total, b_mode=b_mode)
