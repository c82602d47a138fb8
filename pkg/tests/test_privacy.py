import math

import numpy as np
import pytest

from dphawkes import (HawkesParams, HorizonTooShort, ParamBounds, PrivacyBudget,
                      SampleStats, SensitivitySpec, bin_events, estimate,
                      laplace_sample, laplace_samples, mean_sensitivity,
                      privatize_stats, private_estimate, sample_stats,
                      simulate_branching, tree_bound, tree_sizes, validate_horizon,
                      variance_sensitivity)
from dphawkes import NonConvergence

PAPER = ParamBounds(0.5, 2.0, 0.1, 0.75)
GAMMA = 0.05


def spec_aware(b):
    return SensitivitySpec.relation_aware(PAPER, GAMMA, b)


def spec_unaware():
    return SensitivitySpec.relation_unaware(PAPER, GAMMA)


def test_budget_validation():
    with pytest.raises(ValueError):
        PrivacyBudget(epsilon=0.0, gamma=0.05)
    with pytest.raises(ValueError):
        PrivacyBudget(epsilon=1.0, gamma=0.6)
    with pytest.raises(ValueError):
        PrivacyBudget(epsilon=1.0, gamma=0.0)


def test_constants_exact_construction():
    s = spec_unaware()
    assert s.c1 == pytest.approx(math.sqrt(1.1 * 2.0 / (0.25**3 * GAMMA)), rel=1e-14)
    assert s.c1 == pytest.approx(53.066, abs=5e-4)
    assert s.c2 == pytest.approx(3.0 / 0.25**2, rel=1e-14)
    assert s.c2 == 48.0


def test_tree_bound_examples():
    assert tree_bound(0.5, 100000.0) == pytest.approx(3 * math.log(1e5) / 0.25, rel=1e-12)
    assert tree_bound(0.5, 100000.0) == pytest.approx(138.155, abs=5e-3)
    assert tree_bound(1e-12, math.e) == pytest.approx(3.0, rel=1e-9)
    assert tree_bound(0.75, 100000.0) == pytest.approx(552.62, abs=5e-2)


def test_validate_horizon_examples():
    assert validate_horizon(1.0, 1.0, math.e**5)  # threshold is exactly e^5
    assert not validate_horizon(1.0, 1.0, math.e**5 * 0.999)
    assert not validate_horizon(2.0, 0.05, 1e5)
    threshold = (2.0 * math.e**2 / 0.05) ** 2.5
    assert threshold == pytest.approx(1.50e6, rel=5e-3)
    assert validate_horizon(2.0, 0.05, 1e7)


def test_mean_sensitivity():
    assert mean_sensitivity(spec_aware(10), 10000, 1e5) == pytest.approx(0.001)
    assert mean_sensitivity(spec_aware(1), 2, 10.0) == pytest.approx(0.5)
    unaware = mean_sensitivity(spec_unaware(), 10000, 1e5)
    assert unaware == pytest.approx(48 * math.log(1e5) / 10000, rel=1e-12)
    assert unaware == pytest.approx(0.055262, abs=5e-6)
    with pytest.raises(ValueError):
        mean_sensitivity(spec_aware(10), 1, 1e5)


def test_variance_sensitivity_aware():
    c1 = spec_aware(10).c1
    expected = 100 / 10000 + 2 * 10**1.5 * math.sqrt(10.0) * c1 / 9999
    got = variance_sensitivity(spec_aware(10), 10000, 10.0, 1e5)
    assert got == pytest.approx(expected, rel=1e-12)
    assert got == pytest.approx(1.0713, abs=2e-4)
    assert variance_sensitivity(spec_aware(0), 10000, 10.0, 1e5) == 0.0


def test_variance_sensitivity_unaware():
    s = spec_unaware()
    log_t = math.log(1e5)
    k = 10000
    expected = (s.c2**2 * log_t**2
                + 2 * s.c2**1.5 * s.c1 * (k / (k - 1)) * log_t**1.5 * math.sqrt(10.0)) / k
    got = variance_sensitivity(s, k, 10.0, 1e5)
    assert got == pytest.approx(expected, rel=1e-12)


def test_sensitivity_monotonicity():
    rng = np.random.default_rng(5)
    for _ in range(200):
        k = int(rng.integers(2, 10_000))
        t = float(rng.uniform(10.0, 1e6))
        delta = float(rng.uniform(1.0, 50.0))
        b = int(rng.integers(1, 200))
        # nondecreasing in B
        assert mean_sensitivity(spec_aware(b + 1), k, t) >= mean_sensitivity(spec_aware(b), k, t)
        assert (variance_sensitivity(spec_aware(b + 1), k, delta, t)
                >= variance_sensitivity(spec_aware(b), k, delta, t))
        # nondecreasing in log T (unaware), decreasing in K
        s = spec_unaware()
        assert mean_sensitivity(s, k, t * 2) >= mean_sensitivity(s, k, t)
        assert variance_sensitivity(s, k, delta, t * 2) >= variance_sensitivity(s, k, delta, t)
        assert mean_sensitivity(s, k + 1, t) < mean_sensitivity(s, k, t)
        assert variance_sensitivity(s, k + 1, delta, t) < variance_sensitivity(s, k, delta, t)


class _FixedUniform:
    """Minimal Generator stand-in returning a scripted uniform."""

    def __init__(self, u):
        self._u = u

    def random(self, size=None):
        return self._u if size is None else np.full(size, self._u)


def test_laplace_median_is_zero():
    assert laplace_sample(2.0, _FixedUniform(0.5)) == 0.0


def test_laplace_sign_convention():
    assert laplace_sample(1.0, _FixedUniform(0.25)) == pytest.approx(math.log(0.5))
    assert laplace_sample(1.0, _FixedUniform(0.75)) == pytest.approx(-math.log(0.5))


def test_laplace_zero_scale():
    rng = np.random.default_rng(0)
    assert laplace_sample(0.0, rng) == 0.0


def test_laplace_scalar_vector_same_stream():
    scalar = [laplace_sample(1.5, np.random.default_rng(9)) for _ in range(1)][0]
    vector = laplace_samples(1.5, np.random.default_rng(9), 4)
    assert scalar == vector[0]


def test_laplace_variance_and_tails():
    b = 1.0
    draws = laplace_samples(b, np.random.default_rng(12), 1_000_000)
    assert abs(draws.var() - 2 * b**2) / (2 * b**2) < 0.02
    for p in (0.1, 0.01):
        t = math.log(1.0 / p)
        freq = float(np.mean(np.abs(draws) >= b * t))
        se = math.sqrt(p * (1 - p) / draws.size)
        assert abs(freq - p) < 3 * se


def _stats(k=10000, eta=20.0, var=66.0):
    return SampleStats(eta_hat=eta, sigma_sq_hat=var, k=k)


def test_privatize_infinite_budget_is_identity():
    budget = PrivacyBudget(epsilon=math.inf, gamma=GAMMA)
    out = privatize_stats(_stats(), spec_aware(10), budget, 10.0, 1e5, seed=4)
    assert abs(out.eta_hat - 20.0) < 1e-12
    assert abs(out.sigma_sq_hat - 66.0) < 1e-12


def test_privatize_noise_distribution():
    budget = PrivacyBudget(epsilon=1.0, gamma=GAMMA)
    scale = mean_sensitivity(spec_aware(10), 10000, 1e5) / budget.epsilon
    assert scale == pytest.approx(0.001)
    diffs = np.array([
        privatize_stats(_stats(), spec_aware(10), budget, 10.0, 1e5, seed=s).eta_hat - 20.0
        for s in range(4000)])
    assert abs(diffs.var() - 2 * scale**2) / (2 * scale**2) < 0.1
    assert abs(float(np.mean(np.abs(diffs) >= scale * math.log(2))) - 0.5) < 0.03


def test_privatize_unaware_requires_horizon():
    budget = PrivacyBudget(epsilon=1.0, gamma=GAMMA)
    with pytest.raises(HorizonTooShort):
        privatize_stats(_stats(), spec_unaware(), budget, 10.0, 1e5, seed=1)
    out = privatize_stats(_stats(), spec_unaware(), budget, 10.0, 2e6, seed=1)
    assert out.k == 10000


def test_private_estimate_metadata_and_limit():
    p = HawkesParams(1.0, 0.5)
    series = bin_events(simulate_branching(p, 100000.0, seed=41), 10.0)
    base = estimate(series, PAPER)
    budget = PrivacyBudget(epsilon=math.inf, gamma=GAMMA)
    priv = private_estimate(series, PAPER, spec_aware(10), budget, seed=2)
    assert priv.mu_hat == pytest.approx(base.mu_hat, abs=1e-10)
    assert priv.alpha_hat == pytest.approx(base.alpha_hat, abs=1e-10)
    assert priv.epsilon_total == math.inf
    assert priv.gamma_total == GAMMA  # relation-aware keeps gamma
    assert priv.b_mode == "10"

    # gamma = 0.5 pulls the relation-unaware threshold below T = 1e5
    loose = SensitivitySpec.relation_unaware(PAPER, 0.5)
    priv = private_estimate(series, PAPER, loose,
                            PrivacyBudget(epsilon=5.0, gamma=0.5), seed=2)
    assert priv.gamma_total == 1.0
    assert priv.epsilon_total == 10.0
    assert priv.b_mode == "auto"


def test_private_estimate_small_budget_often_fails():
    p = HawkesParams(1.0, 0.5)
    series = bin_events(simulate_branching(p, 100000.0, seed=43), 10.0)
    budget = PrivacyBudget(epsilon=0.25, gamma=GAMMA)
    failures = 0
    for seed in range(100):
        try:
            private_estimate(series, PAPER, spec_aware(100), budget, seed=seed)
        except NonConvergence:
            failures += 1
    assert failures >= 20


def test_tree_deletion_containment_smoke():
    # reduced version of the acceptance criterion (200 trials here)
    p = HawkesParams(1.0, 0.5)
    b, delta, k = 10, 10.0, 500
    spec = spec_aware(b)
    rng = np.random.default_rng(77)
    var_ok = 0
    trials = 200
    for i in range(trials):
        seq = simulate_branching(p, k * delta, seed=10_000 + i, warmup=0.0)
        series = bin_events(seq, delta)
        stats = sample_stats(series)
        sizes = tree_sizes(seq)
        eligible = np.flatnonzero(sizes.sizes <= b)
        tree_ids = np.unique(seq.tree_id)[eligible]
        victim = tree_ids[rng.integers(0, tree_ids.size)]
        keep = seq.tree_id != victim
        kept_counts = np.bincount(
            np.floor_divide(seq.timestamps[keep], delta).astype(int), minlength=k)[:k]
        eta2 = kept_counts.mean()
        var2 = kept_counts.var(ddof=1)
        assert abs(eta2 - stats.eta_hat) <= mean_sensitivity(spec, k, series.horizon) + 1e-12
        if abs(var2 - stats.sigma_sq_hat) <= variance_sensitivity(spec, k, delta, series.horizon):
            var_ok += 1
    assert var_ok / trials >= 1 - GAMMA


def test_dp_likelihood_ratio_smoke():
    # fixed neighboring series differing by one size-B tree
    k, b, eps = 100, 5, 1.0
    rng = np.random.default_rng(5)
    y = rng.poisson(20.0, k).astype(float)
    placement = np.bincount(rng.integers(0, k, b), minlength=k)
    eta1 = y.mean()
    eta2 = (y + placement).mean()
    scale = (b / k) / eps
    n = 100_000
    draws1 = eta1 + laplace_samples(scale, np.random.default_rng(101), n)
    draws2 = eta2 + laplace_samples(scale, np.random.default_rng(202), n)
    lo = min(draws1.min(), draws2.min())
    hi = max(draws1.max(), draws2.max())
    bins = np.linspace(lo, hi, 60)
    h1, _ = np.histogram(draws1, bins)
    h2, _ = np.histogram(draws2, bins)
    mask = (h1 >= 100) & (h2 >= 100)
    ratio_slack = 3.0 * np.sqrt(1.0 / h1[mask] + 1.0 / h2[mask])
    assert np.all(h1[mask] <= math.exp(eps) * h2[mask] * (1 + ratio_slack))
    assert np.all(h2[mask] <= math.exp(eps) * h1[mask] * (1 + ratio_slack))
