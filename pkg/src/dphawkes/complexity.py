"""Sample-complexity calculators for the non-private and private estimators.

The non-private condition is a direct maximum of four terms; the private one
mixes a direct bound with conditions of the form T/(log T)^p >= R, which are
strictly increasing in T on the solver bracket and therefore solved by
bisection.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .counts import bin_events
from .errors import PreconditionViolated
from .hawkes import HawkesParams, ParamBounds
from .privacy import PrivacyBudget, c1_constant, c2_constant
from .rng import task_rng
from .simulate import simulate_branching

COMPLEXITY_CSV_HEADER = ("term_label", "value", "binding")

_SQRT2 = math.sqrt(2.0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)

# Acklam's rational approximation to the standard normal quantile (|err| < 1.2e-9),
# sharpened by one Newton step against the erfc-based CDF.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def _normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / _SQRT2)


def _quantile_lower_half(p: float) -> float:
    """Quantile for p in (0, 0.5]: x <= 0, where erfc keeps relative accuracy."""
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
             / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    else:
        q = p - 0.5
        r = q * q
        x = ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
             / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))
    if x > -37.0:  # exp(x^2/2) stays finite; beyond, the base approx stands
        x -= (_normal_cdf(x) - p) * _SQRT_2PI * math.exp(0.5 * x * x)
    return x


def inverse_normal_cdf(p: float) -> float:
    """Standard normal quantile, absolute error below 1e-9 on (0, 1).

    The upper half folds onto the lower by symmetry (1-p is exact for
    p >= 0.5), so the Newton refinement always works on the small tail.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly between 0 and 1")
    if p == 0.5:
        return 0.0
    if p > 0.5:
        return -_quantile_lower_half(1.0 - p)
    return _quantile_lower_half(p)


def c9_constant(bounds: ParamBounds, constants: str = "theorem") -> float:
    """Estimation-error amplification constant from the prior box.

    constants="theorem" uses the main-text coefficients (8, 4/3);
    constants="appendix" the private-proof variant (10, 10/3).
    """
    q = 1.0 - bounds.alpha_upper
    if constants == "theorem":
        return max(8.0 / (bounds.mu_lower * q),
                   1.0 + 8.0 * bounds.mu_upper / (bounds.mu_lower * q**2) + 4.0 / (3.0 * q))
    if constants == "appendix":
        return max(10.0 / (bounds.mu_lower * q),
                   2.0 + 10.0 * bounds.mu_upper / (bounds.mu_lower * q**2) + 10.0 / (3.0 * q))
    raise ValueError(f"unknown constants variant {constants!r}")


@dataclass(frozen=True)
class ComplexityInputs:
    """Inputs common to the complexity conditions.

    eta4 is the fourth central moment of a stationary bin count, supplied by
    the user or by eta4_monte_carlo. c is the Delta = c*log(T) constant and is
    required only by the private calculator; the caller is responsible for
    keeping delta_bin consistent with c at the solved horizon.
    """

    bounds: ParamBounds
    xi: float
    delta_prob: float
    delta_bin: float
    eta4: float
    sigma_sq: float
    c: float | None = None

    def __post_init__(self):
        if not self.xi > 0:
            raise ValueError("xi must be positive")
        if not 0 < self.delta_prob <= 1:
            raise ValueError("delta_prob must lie in (0, 1]")
        if not self.delta_bin > 0:
            raise ValueError("delta_bin must be positive")
        if not self.sigma_sq > 0:
            raise ValueError("sigma_sq must be positive")


@dataclass(frozen=True)
class ComplexityReport:
    required_T: float
    binding_term: str
    all_terms: list[tuple[str, float]]


def _check_preconditions(inputs: ComplexityInputs, c9: float) -> None:
    xi_cap = c9 * inputs.bounds.mu_lower / 6.0
    if not inputs.xi < xi_cap:
        raise PreconditionViolated(
            f"xi {inputs.xi:.6g} violates xi < C9*mu_lower/6 = {xi_cap:.6g}")
    delta_floor = (4.0 * c9 * inputs.bounds.mu_upper
                   / ((1.0 - inputs.bounds.alpha_upper) ** 4 * inputs.xi))
    if not inputs.delta_bin > delta_floor:
        raise PreconditionViolated(
            f"delta_bin {inputs.delta_bin:.6g} violates "
            f"delta_bin > 4*C9*mu_upper/((1-alpha_upper)^4*xi) = {delta_floor:.6g}")


def _report(terms: list[tuple[str, float]]) -> ComplexityReport:
    binding = max(terms, key=lambda kv: kv[1])
    return ComplexityReport(required_T=binding[1], binding_term=binding[0],
                            all_terms=terms)


def required_T_nonprivate(inputs: ComplexityInputs,
                          constants: str = "theorem") -> ComplexityReport:
    """Observation-time lower bound guaranteeing xi-accuracy w.p. 1 - delta_prob."""
    c9 = c9_constant(inputs.bounds, constants)
    _check_preconditions(inputs, c9)
    xi, d, delta = inputs.xi, inputs.delta_prob, inputs.delta_bin
    psi_8 = inverse_normal_cdf(1.0 - d / 8.0)
    psi_16 = inverse_normal_cdf(1.0 - d / 16.0)
    pref = inputs.sigma_sq / xi
    terms = [
        ("mean_clt", pref * c9**2 * psi_8**2 / (xi * delta)),
        ("var_fourth_moment",
         pref * 9.0 * c9**2 * psi_16**2 * (inputs.eta4 - inputs.sigma_sq) / (xi * delta)),
        ("var_mean_square", pref * 3.0 * c9 * psi_16**2),
        ("var_markov", pref * 24.0 * c9 / d),
    ]
    return _report(terms)


_SOLVE_LO = math.exp(3.0)
_SOLVE_HI = 1e30
_SOLVE_RTOL = 1e-9


def _solve_t_over_logpow(rhs: float, power: float) -> float:
    """Smallest T on [e^3, 1e30] with T / (log T)^power >= rhs.

    T/(log T)^power is strictly increasing there; returns the upper end of the
    final bisection bracket so the inequality holds at the reported T.
    """
    def f(t: float) -> float:
        return t / math.log(t) ** power

    lo, hi = _SOLVE_LO, _SOLVE_HI
    if f(lo) >= rhs:
        return lo
    if f(hi) < rhs:
        raise ValueError(f"condition T/(log T)^{power} >= {rhs:.3g} unsolvable below 1e30")
    while hi - lo > _SOLVE_RTOL * hi:
        mid = 0.5 * (lo + hi)
        if f(mid) >= rhs:
            hi = mid
        else:
            lo = mid
    return hi


def required_T_private(inputs: ComplexityInputs, budget: PrivacyBudget,
                       relation_aware_b: int | None = None,
                       constants: str = "theorem") -> ComplexityReport:
    """Private-estimator horizon bound under Delta = c*log(T).

    The first condition is a direct bound on T; the T/log(T)-type conditions
    are solved by bisection. relation_aware_b switches the Laplace-tail
    condition to its known-maximum-tree-size form.
    """
    if inputs.c is None:
        raise ValueError("inputs.c (the Delta = c*log T constant) is required")
    c9 = c9_constant(inputs.bounds, constants)
    _check_preconditions(inputs, c9)
    b = inputs.bounds
    xi, d, c = inputs.xi, inputs.delta_prob, inputs.c
    q = 1.0 - b.alpha_upper
    psi_16 = inverse_normal_cdf(1.0 - d / 16.0)
    psi_32 = inverse_normal_cdf(1.0 - d / 32.0)

    base12 = c9**2 * b.mu_upper / (q**3 * xi**2)
    terms = [
        ("mean_clt", base12 * psi_16**2),
        ("var_fourth_moment",
         base12 * 9.0 * c9**2 * psi_32**2 * (inputs.eta4 - inputs.sigma_sq)),
    ]

    base13 = c * b.mu_upper / (q**3 * xi)
    terms.append(("var_mean_square",
                  _solve_t_over_logpow(base13 * 3.0 * c9 * psi_32**2, 1.0)))
    terms.append(("var_markov",
                  _solve_t_over_logpow(base13 * 48.0 * c9 / d, 1.0)))

    c1 = c1_constant(b, budget.gamma)
    log4d = math.log(4.0 / d)
    if relation_aware_b is None:
        c2 = c2_constant(b)
        rhs = 4.0 * math.sqrt(c) * c1 * c2**2 * c9 * log4d / (budget.epsilon * xi)
        terms.append(("laplace_tail", _solve_t_over_logpow(rhs, 2.5)))
    else:
        if relation_aware_b < 1:
            raise ValueError("relation_aware_b must be a positive integer")
        rhs = (4.0 * math.sqrt(c) * relation_aware_b**2 * c1 * c9 * log4d
               / (budget.epsilon * xi))
        terms.append(("laplace_tail", _solve_t_over_logpow(rhs, 0.5)))
    return _report(terms)


def required_T_mean(sigma_sq: float, xi: float, delta_prob: float,
                    delta_bin: float) -> float:
    """Horizon bound for the sample mean alone: sigma^2 Psi(1-delta/4)^2 / (xi^2 Delta)."""
    if not (sigma_sq > 0 and xi > 0 and delta_bin > 0):
        raise ValueError("sigma_sq, xi and delta_bin must be positive")
    if not 0 < delta_prob <= 1:
        raise ValueError("delta_prob must lie in (0, 1]")
    psi = inverse_normal_cdf(1.0 - delta_prob / 4.0)
    return sigma_sq * psi**2 / (xi**2 * delta_bin)


@dataclass(frozen=True)
class Eta4Estimate:
    value: float
    std_error: float
    num_bins: int


def eta4_monte_carlo(params: HawkesParams, delta: float, num_bins: int,
                     seed: int) -> Eta4Estimate:
    """Monte-Carlo fourth central moment of stationary bin counts.

    Bins are simulated in independent warmed-up series; centering uses the
    known theoretical mean, and the standard error comes from per-series block
    means (bins within a series are dependent, series are not).
    """
    if num_bins < 10_000:
        raise ValueError("num_bins must be at least 1e4")
    eta = params.mu * delta / (1.0 - params.alpha)
    bins_per = min(5000, num_bins // 20)
    n_series = math.ceil(num_bins / bins_per)
    block_means = np.empty(n_series)
    for s in range(n_series):
        sim = simulate_branching(params, bins_per * delta, task_rng(seed, s))
        counts = bin_events(sim, delta).counts
        block_means[s] = float(np.mean((counts - eta) ** 4))
    value = float(block_means.mean())
    se = float(block_means.std(ddof=1) / math.sqrt(n_series))
    return Eta4Estimate(value=value, std_error=se, num_bins=bins_per * n_series)


def write_complexity_csv(report: ComplexityReport, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(COMPLEXITY_CSV_HEADER) + "\n")
        for label, value in report.all_terms:
            fh.write(f"{label},{value:.17g},{int(label == report.binding_term)}\n")


def read_complexity_csv(path) -> ComplexityReport:
    terms: list[tuple[str, float]] = []
    binding = None
    with open(path, newline="") as fh:
        header = fh.readline().strip()
        if tuple(header.split(",")) != COMPLEXITY_CSV_HEADER:
            raise ValueError(f"{path}: expected header {','.join(COMPLEXITY_CSV_HEADER)}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            label, value, flag = line.split(",")
            terms.append((label, float(value)))
            if flag == "1":
                binding = label
    if binding is None:
        raise ValueError(f"{path}: no binding term marked")
    return ComplexityReport(required_T=dict(terms)[binding], binding_term=binding,
                            all_terms=terms)
