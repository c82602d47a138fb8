"""Synthetic and real-data experiment harness: sweeps and time-to-threshold.

Experiment design: one simulated sequence per repetition is shared across the
(epsilon, B) grid so comparisons between cells are paired; Laplace noise is
drawn independently per cell from a seed derived from the cell coordinates.
The time-to-threshold search additionally reuses the same noise uniforms
across cells at fixed (T, rep), which makes |noise| pointwise monotone in the
noise scale and keeps the required-time orderings stable at small repetition
counts. Everything is a pure function of the base seed.
"""
from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import ExperimentConfig, delta_from_rule
from .counts import CountSeries, bin_events, sample_stats
from .errors import ConfigError, HorizonTooShort, NonConvergence
from .estimator import EstimateResult, estimate, invert_moments
from .ingest import ingest_timestamps
from .privacy import (PrivacyBudget, SensitivitySpec, mean_sensitivity,
                      privatize_stats, validate_horizon, variance_sensitivity)
from .simulate import simulate_branching

SWEEP_CSV_HEADER = ("epsilon", "b_mode", "rep", "seed", "mu_hat", "alpha_hat",
                    "err_mu", "err_alpha", "converged", "wall_ms")
SUMMARY_CSV_HEADER = ("epsilon", "b_mode", "n", "n_converged",
                      "mean_err_mu", "mean_err_alpha",
                      "err_mu_p2_5", "err_mu_p97_5",
                      "err_alpha_p2_5", "err_alpha_p97_5")
TTT_CSV_HEADER = ("epsilon", "b_mode", "required_t", "capped", "median_err_alpha")

BASELINE_B_MODE = "none"


@dataclass(frozen=True)
class SweepRecord:
    epsilon: float
    b_mode: str
    rep: int
    seed: int
    mu_hat: float | None
    alpha_hat: float | None
    err_mu: float | None
    err_alpha: float | None
    converged: bool
    wall_ms: float


def _derived_seed(base_seed: int, *coords: int) -> int:
    """Stable 32-bit task seed from the base seed and coordinates."""
    return int(np.random.SeedSequence([int(base_seed), *map(int, coords)]).generate_state(1)[0])


def _norm_errors(result: EstimateResult, truth_mu: float, truth_alpha: float):
    return (abs(result.mu_hat - truth_mu) / truth_mu,
            abs(result.alpha_hat - truth_alpha) / truth_alpha)


def _spec_for(b_mode: str, config: ExperimentConfig) -> SensitivitySpec:
    if b_mode == "auto":
        return SensitivitySpec.relation_unaware(config.bounds, config.gamma)
    return SensitivitySpec.relation_aware(config.bounds, config.gamma, int(b_mode))


def _sweep_rep(config: ExperimentConfig, rep: int,
               fixed_series: CountSeries | None) -> list[SweepRecord]:
    """All records for one repetition: the shared series, a baseline row, and
    one privatized row per (epsilon, b_mode) cell."""
    records: list[SweepRecord] = []
    delta = config.delta
    if fixed_series is None:
        sim_seed = _derived_seed(config.seed, 0, rep)
        t0 = time.perf_counter()
        sim = simulate_branching(config.params, config.horizon, sim_seed)
        series = bin_events(sim, delta)
        sim_ms = (time.perf_counter() - t0) * 1000.0
    else:
        sim_seed = _derived_seed(config.seed, 0, 0)
        series = fixed_series
        sim_ms = 0.0
    stats = sample_stats(series)

    t0 = time.perf_counter()
    base = estimate(series, config.bounds)
    base_ms = (time.perf_counter() - t0) * 1000.0
    if config.dataset is not None:
        truth_mu, truth_alpha = base.mu_hat, base.alpha_hat
    else:
        truth_mu, truth_alpha = config.mu, config.alpha
    err_mu, err_alpha = _norm_errors(base, truth_mu, truth_alpha)
    records.append(SweepRecord(
        epsilon=math.inf, b_mode=BASELINE_B_MODE, rep=rep, seed=sim_seed,
        mu_hat=base.mu_hat, alpha_hat=base.alpha_hat,
        err_mu=err_mu, err_alpha=err_alpha, converged=True,
        wall_ms=sim_ms + base_ms))

    for ei, eps_total in enumerate(config.epsilons):
        budget = PrivacyBudget(epsilon=eps_total / 2.0, gamma=config.gamma)
        for bi, b_mode in enumerate(config.b_values):
            cell_seed = _derived_seed(config.seed, 1, rep, ei, bi)
            spec = _spec_for(b_mode, config)
            t0 = time.perf_counter()
            try:
                priv = privatize_stats(stats, spec, budget, series.delta,
                                       series.horizon, cell_seed)
                if priv.eta_hat <= 0:  # noise swamped the mean: count as failure
                    raise NonConvergence("privatized mean is nonpositive")
                result = invert_moments(priv.eta_hat, priv.sigma_sq_hat,
                                        series.delta, config.bounds)
            except (NonConvergence, HorizonTooShort):
                records.append(SweepRecord(
                    epsilon=eps_total, b_mode=b_mode, rep=rep, seed=cell_seed,
                    mu_hat=None, alpha_hat=None, err_mu=None, err_alpha=None,
                    converged=False, wall_ms=(time.perf_counter() - t0) * 1000.0))
                continue
            err_mu, err_alpha = _norm_errors(result, truth_mu, truth_alpha)
            records.append(SweepRecord(
                epsilon=eps_total, b_mode=b_mode, rep=rep, seed=cell_seed,
                mu_hat=result.mu_hat, alpha_hat=result.alpha_hat,
                err_mu=err_mu, err_alpha=err_alpha, converged=True,
                wall_ms=(time.perf_counter() - t0) * 1000.0))
    return records


def run_sweep(config: ExperimentConfig, workers: int = 1) -> list[SweepRecord]:
    """Full (epsilon x B x repetition) grid plus a non-private baseline per rep.

    Records come back in deterministic cell order (epsilon, then B, then rep),
    baselines last, regardless of worker completion order.
    """
    fixed_series: CountSeries | None = None
    if config.dataset is not None:
        events = ingest_timestamps(config.dataset)
        fixed_series = bin_events(events, delta_from_rule(config.delta_mode, events.horizon))
    reps = range(config.repetitions)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_rep = list(pool.map(_sweep_rep,
                                    [config] * config.repetitions, reps,
                                    [fixed_series] * config.repetitions))
    else:
        per_rep = [_sweep_rep(config, rep, fixed_series) for rep in reps]

    by_cell: dict[tuple, SweepRecord] = {}
    for records in per_rep:
        for rec in records:
            key = (rec.epsilon, rec.b_mode, rec.rep)
            by_cell[key] = rec
    ordered: list[SweepRecord] = []
    for eps in config.epsilons:
        for b_mode in config.b_values:
            for rep in reps:
                ordered.append(by_cell[(eps, b_mode, rep)])
    for rep in reps:
        key = (math.inf, BASELINE_B_MODE, rep)
        if key in by_cell:
            ordered.append(by_cell[key])
    return ordered


def summarize_sweep(records: list[SweepRecord]) -> list[dict]:
    """Mean and empirical 2.5/97.5 percentile bands per (epsilon, b_mode).

    Percentiles rather than Gaussian bands: the error distribution is skewed
    near the non-convergence regime. Failed cells are excluded from the
    statistics and reported through n_converged.
    """
    groups: dict[tuple, list[SweepRecord]] = {}
    order: list[tuple] = []
    for rec in records:
        key = (rec.epsilon, rec.b_mode)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(rec)
    rows = []
    for key in order:
        recs = groups[key]
        ok = [r for r in recs if r.converged]
        row = {"epsilon": key[0], "b_mode": key[1], "n": len(recs),
               "n_converged": len(ok)}
        if ok:
            for name in ("err_mu", "err_alpha"):
                vals = np.array([getattr(r, name) for r in ok])
                lo, hi = np.percentile(vals, [2.5, 97.5])
                row[f"mean_{name}"] = float(vals.mean())
                row[f"{name}_p2_5"] = float(lo)
                row[f"{name}_p97_5"] = float(hi)
        else:
            for name in ("err_mu", "err_alpha"):
                row[f"mean_{name}"] = None
                row[f"{name}_p2_5"] = None
                row[f"{name}_p97_5"] = None
        rows.append(row)
    return rows


@dataclass(frozen=True)
class ThresholdCell:
    epsilon: float
    b_mode: str
    required_t: float | None
    capped: bool
    median_err_alpha: float | None


def _laplace_from_u(scale: float, u: float) -> float:
    if scale == 0.0:
        return 0.0
    magnitude = -scale * math.log(max(1.0 - 2.0 * abs(u - 0.5), 5e-324))
    return -magnitude if u < 0.5 else magnitude


def run_time_to_threshold(config: ExperimentConfig, threshold: float,
                          t_min: float = 12500.0, t_max: float = 1e6) -> list[ThresholdCell]:
    """Doubling search over T until the median alpha error drops below threshold.

    For each probed T the per-repetition sequence and the noise uniforms are
    shared across all (epsilon, B) cells; only the noise scale differs. The
    first passing probe is reported; cells still failing at t_max are marked
    capped. Non-converged repetitions count as infinite error.
    """
    if config.dataset is not None:
        raise ConfigError("time-to-threshold requires synthetic ground truth")
    if not threshold > 0:
        raise ConfigError("threshold must be positive")
    if not 0 < t_min <= t_max:
        raise ConfigError("need 0 < t_min <= t_max")
    probes: list[float] = []
    t = t_min
    while t <= t_max:
        probes.append(t)
        t *= 2.0
    if probes[-1] < t_max:
        probes.append(t_max)

    cells = [(eps, b_mode) for eps in config.epsilons for b_mode in config.b_values]
    resolved: dict[tuple, ThresholdCell] = {}
    alpha_truth = config.alpha

    for pi, horizon in enumerate(probes):
        if len(resolved) == len(cells):
            break
        delta = delta_from_rule(config.delta_mode, horizon)
        stats_per_rep = []
        noise_per_rep = []
        for rep in range(config.repetitions):
            sim_seed = _derived_seed(config.seed, 3, pi, rep)
            sim = simulate_branching(config.params, horizon, sim_seed)
            series = bin_events(sim, delta)
            stats_per_rep.append(sample_stats(series))
            u = np.random.default_rng(_derived_seed(config.seed, 4, pi, rep)).random(2)
            noise_per_rep.append((float(u[0]), float(u[1])))
        k = int(round(horizon / delta))
        for eps_total, b_mode in cells:
            if (eps_total, b_mode) in resolved:
                continue
            spec = _spec_for(b_mode, config)
            eps_stat = eps_total / 2.0
            errs = []
            for rep in range(config.repetitions):
                stats = stats_per_rep[rep]
                u1, u2 = noise_per_rep[rep]
                try:
                    if b_mode == "auto" and not validate_horizon(
                            spec.mu_upper, spec.gamma, horizon):
                        raise HorizonTooShort("below relation-unaware threshold")
                    eta_priv = stats.eta_hat + _laplace_from_u(
                        mean_sensitivity(spec, stats.k, horizon) / eps_stat, u1)
                    var_priv = stats.sigma_sq_hat + _laplace_from_u(
                        variance_sensitivity(spec, stats.k, delta, horizon) / eps_stat, u2)
                    if eta_priv <= 0:
                        raise NonConvergence("privatized mean is nonpositive")
                    result = invert_moments(eta_priv, var_priv, delta, config.bounds)
                    errs.append(abs(result.alpha_hat - alpha_truth) / alpha_truth)
                except (NonConvergence, HorizonTooShort):
                    errs.append(math.inf)
            median = float(np.median(errs))
            if median <= threshold:
                resolved[(eps_total, b_mode)] = ThresholdCell(
                    epsilon=eps_total, b_mode=b_mode, required_t=horizon,
                    capped=False, median_err_alpha=median)

    out = []
    for eps_total, b_mode in cells:
        cell = resolved.get((eps_total, b_mode))
        if cell is None:
            cell = ThresholdCell(epsilon=eps_total, b_mode=b_mode,
                                 required_t=None, capped=True, median_err_alpha=None)
        out.append(cell)
    return out


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_sweep_csv(records: list[SweepRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(SWEEP_CSV_HEADER) + "\n")
        for r in records:
            fh.write(",".join([_fmt(r.epsilon), r.b_mode, str(r.rep), str(r.seed),
                               _fmt(r.mu_hat), _fmt(r.alpha_hat),
                               _fmt(r.err_mu), _fmt(r.err_alpha),
                               str(int(r.converged)), _fmt(r.wall_ms)]) + "\n")


def read_sweep_csv(path) -> list[SweepRecord]:
    records = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != SWEEP_CSV_HEADER:
            raise ValueError(f"{path}: expected header {','.join(SWEEP_CSV_HEADER)}")
        for row in reader:
            records.append(SweepRecord(
                epsilon=float(row["epsilon"]), b_mode=row["b_mode"],
                rep=int(row["rep"]), seed=int(row["seed"]),
                mu_hat=float(row["mu_hat"]) if row["mu_hat"] else None,
                alpha_hat=float(row["alpha_hat"]) if row["alpha_hat"] else None,
                err_mu=float(row["err_mu"]) if row["err_mu"] else None,
                err_alpha=float(row["err_alpha"]) if row["err_alpha"] else None,
                converged=bool(int(row["converged"])), wall_ms=float(row["wall_ms"])))
    return records


def write_summary_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(SUMMARY_CSV_HEADER) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[k]) for k in SUMMARY_CSV_HEADER) + "\n")


def write_threshold_csv(cells: list[ThresholdCell], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(TTT_CSV_HEADER) + "\n")
        for c in cells:
            fh.write(",".join([_fmt(c.epsilon), c.b_mode, _fmt(c.required_t),
                               str(int(c.capped)), _fmt(c.median_err_alpha)]) + "\n")


def read_threshold_csv(path) -> list[ThresholdCell]:
    cells = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != TTT_CSV_HEADER:
            raise ValueError(f"{path}: expected header {','.join(TTT_CSV_HEADER)}")
        for row in reader:
            cells.append(ThresholdCell(
                epsilon=float(row["epsilon"]), b_mode=row["b_mode"],
                required_t=float(row["required_t"]) if row["required_t"] else None,
                capped=bool(int(row["capped"])),
                median_err_alpha=(float(row["median_err_alpha"])
                                  if row["median_err_alpha"] else None)))
    return cells


def read_summary_csv(path) -> list[dict]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != SUMMARY_CSV_HEADER:
            raise ValueError(f"{path}: expected header {','.join(SUMMARY_CSV_HEADER)}")
        for raw in reader:
            row = {"epsilon": float(raw["epsilon"]), "b_mode": raw["b_mode"],
                   "n": int(raw["n"]), "n_converged": int(raw["n_converged"])}
            for key in SUMMARY_CSV_HEADER[4:]:
                row[key] = float(raw[key]) if raw[key] else None
            rows.append(row)
    return rows


PLOT_SCRIPT = '''\
#!/usr/bin/env python3
"""Plot the privacy-utility sweep from sweep_summary.csv (this directory)."""
import csv
import math
from collections import defaultdict

import matplotlib.pyplot as plt

groups = defaultdict(list)
baseline = None
with open("sweep_summary.csv", newline="") as fh:
    for row in csv.DictReader(fh):
        if not row["mean_err_alpha"]:
            continue
        eps = float(row["epsilon"])
        point = (eps, float(row["mean_err_alpha"]),
                 float(row["err_alpha_p2_5"]), float(row["err_alpha_p97_5"]))
        if row["b_mode"] == "none":
            baseline = point
        else:
            groups[row["b_mode"]].append(point)

fig, ax = plt.subplots(figsize=(7, 4.5))
for b_mode, pts in sorted(groups.items()):
    pts.sort()
    xs = [p[0] for p in pts]
    ax.plot(xs, [p[1] for p in pts], marker="o", label=f"B = {b_mode}")
    ax.fill_between(xs, [p[2] for p in pts], [p[3] for p in pts], alpha=0.2)
if baseline is not None:
    ax.axhline(baseline[1], color="black", linestyle="--", label="non-private")
ax.set_xscale("log")
ax.set_yscale("log")
ax.set_xlabel("privacy budget (total epsilon)")
ax.set_ylabel("normalized alpha error")
ax.legend()
fig.tight_layout()
fig.savefig("sweep_plot.png", dpi=150)
print("wrote sweep_plot.png")
'''


def emit_plot_script(path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(PLOT_SCRIPT)
