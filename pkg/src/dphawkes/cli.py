"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 I/O error,
4 estimation failure (non-convergence or horizon below the privacy threshold),
5 all sweep cells failed.
"""
from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys

from .branching import tree_sizes, write_tree_csv
from .complexity import (ComplexityInputs, eta4_monte_carlo, required_T_nonprivate,
                         required_T_private, write_complexity_csv)
from .config import ExperimentConfig, delta_from_rule, parse_config_file
from .counts import bin_events, sample_stats
from .errors import ConfigError, HorizonTooShort, NonConvergence, PreconditionViolated
from .estimator import EstimateResult, estimate, invert_moments
from .events import read_events_csv, write_events_csv
from .ingest import ingest_timestamps
from .privacy import PrivacyBudget, SensitivitySpec, privatize_stats
from .experiments import (BASELINE_B_MODE, emit_plot_script, run_sweep,
                          run_time_to_threshold, summarize_sweep,
                          write_summary_csv, write_sweep_csv, write_threshold_csv)
from .simulate import simulate_branching, simulate_thinning

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_ESTIMATION = 4
EXIT_ALL_FAILED = 5

RESULT_CSV_HEADER = ("mu_hat", "alpha_hat", "eta_hat", "sigma_sq_hat", "converged",
                     "iterations", "residual", "boundary", "epsilon_total",
                     "gamma_total", "b_mode", "err_mu", "err_alpha")


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key=value configuration file")
    parser.add_argument("--mu", type=float)
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--mu_lower", type=float)
    parser.add_argument("--mu_upper", type=float)
    parser.add_argument("--alpha_lower", type=float)
    parser.add_argument("--alpha_upper", type=float)
    parser.add_argument("--gamma", type=float)
    parser.add_argument("--epsilons", help="comma-separated total budgets")
    parser.add_argument("--b_values", help="comma-separated tree caps or 'auto'")
    parser.add_argument("--delta_mode", help="'log' or a fixed bin width")
    parser.add_argument("--horizon", type=float)
    parser.add_argument("--repetitions", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out_dir")


def _config_from_args(args) -> tuple[ExperimentConfig, dict]:
    overrides = {key: getattr(args, key) for key in
                 ("mu", "alpha", "mu_lower", "mu_upper", "alpha_lower", "alpha_upper",
                  "gamma", "delta_mode", "horizon", "repetitions", "seed", "out_dir")}
    if args.epsilons is not None:
        overrides["epsilons"] = tuple(float(t) for t in args.epsilons.split(",") if t.strip())
    if args.b_values is not None:
        overrides["b_values"] = tuple(t.strip() for t in args.b_values.split(",") if t.strip())
    file_values = parse_config_file(args.config) if args.config else {}
    explicit = set(file_values) | {k for k, v in overrides.items() if v is not None}
    merged = dict(file_values)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentConfig(**merged), {"explicit": explicit}
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _ensure_out_dir(config: ExperimentConfig) -> str:
    os.makedirs(config.out_dir, exist_ok=True)
    return config.out_dir


def _write_meta(path, entries: dict) -> None:
    with open(path, "w") as fh:
        for key, value in entries.items():
            fh.write(f"{key}={value}\n")


def _read_meta(path) -> dict:
    entries = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line and "=" in line:
                key, value = line.split("=", 1)
                entries[key] = value
    return entries


def cmd_simulate(args) -> int:
    config, _ = _config_from_args(args)
    out_dir = _ensure_out_dir(config)
    out = args.out or os.path.join(out_dir, "events.csv")
    simulate = simulate_thinning if args.algorithm == "thinning" else simulate_branching
    events = simulate(config.params, config.horizon, config.seed, warmup=args.warmup)
    write_events_csv(events, out)
    _write_meta(out + ".meta", {
        "mu": f"{config.mu:.17g}", "alpha": f"{config.alpha:.17g}",
        "horizon": f"{config.horizon:.17g}",
        "warmup": "default" if args.warmup is None else f"{args.warmup:.17g}",
        "seed": config.seed, "algorithm": args.algorithm})
    print(f"wrote {len(events)} events to {out}")
    return EXIT_OK


def _load_events(path, horizon_flag: float | None):
    horizon = horizon_flag
    if horizon is None and os.path.exists(path + ".meta"):
        meta = _read_meta(path + ".meta")
        if "horizon" in meta:
            horizon = float(meta["horizon"])
    return read_events_csv(path, horizon=horizon)


def _result_row(result: EstimateResult | None, err_mu, err_alpha) -> list[str]:
    if result is None:
        return ["", "", "", "", "0", "", "", "", "", "", "", "", ""]
    def fmt(v):
        return "" if v is None else (f"{v:.17g}" if isinstance(v, float) else str(v))
    return [fmt(result.mu_hat), fmt(result.alpha_hat), fmt(result.eta_hat),
            fmt(result.sigma_sq_hat), str(int(result.converged)),
            str(result.iterations), fmt(result.residual), result.boundary or "",
            fmt(result.epsilon_total), fmt(result.gamma_total), result.b_mode or "",
            fmt(err_mu), fmt(err_alpha)]


def _write_result_csv(path, result, err_mu, err_alpha) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(RESULT_CSV_HEADER) + "\n")
        fh.write(",".join(_result_row(result, err_mu, err_alpha)) + "\n")


def _estimate_flow(args, privatize_required: bool) -> int:
    config, meta = _config_from_args(args)
    events = _load_events(args.input, args.horizon)
    delta = delta_from_rule(config.delta_mode, events.horizon)
    series = bin_events(events, delta)
    stats = sample_stats(series)
    print(f"bins K={stats.k} delta={delta:g}  eta_hat={stats.eta_hat:.6g} "
          f"sigma_sq_hat={stats.sigma_sq_hat:.6g}")

    epsilon_total = args.epsilon
    if privatize_required and epsilon_total is None:
        raise ConfigError("--epsilon is required for privatize")
    result = None
    try:
        if epsilon_total is not None:
            budget = PrivacyBudget(epsilon=epsilon_total / 2.0, gamma=config.gamma)
            if args.b == "auto":
                spec = SensitivitySpec.relation_unaware(config.bounds, config.gamma)
            else:
                spec = SensitivitySpec.relation_aware(config.bounds, config.gamma, int(args.b))
            priv = privatize_stats(stats, spec, budget, series.delta,
                                   events.horizon, config.seed)
            print(f"private stats: eta_hat={priv.eta_hat:.6g} "
                  f"sigma_sq_hat={priv.sigma_sq_hat:.6g} (total budget {epsilon_total:g})")
            result = invert_moments(priv.eta_hat, priv.sigma_sq_hat, series.delta,
                                    config.bounds)
            gamma_total = config.gamma if args.b != "auto" else 2 * config.gamma
            result = dataclasses.replace(result, epsilon_total=epsilon_total,
                                         gamma_total=gamma_total, b_mode=str(args.b))
        else:
            result = estimate(series, config.bounds)
    except (NonConvergence, HorizonTooShort) as exc:
        print(f"estimation failed: {exc}", file=sys.stderr)
        if args.out:
            _write_result_csv(args.out, None, None, None)
        return EXIT_ESTIMATION

    err_mu = err_alpha = None
    truth_given = "mu" in meta["explicit"] and "alpha" in meta["explicit"]
    if truth_given:
        err_mu = abs(result.mu_hat - config.mu) / config.mu
        err_alpha = abs(result.alpha_hat - config.alpha) / config.alpha
    print(f"mu_hat={result.mu_hat:.6g} alpha_hat={result.alpha_hat:.6g}"
          + (f"  E_mu={err_mu:.4g} E_alpha={err_alpha:.4g}" if truth_given else ""))
    if result.boundary:
        print(f"note: root at {result.boundary} bracket edge")
    if args.out:
        _write_result_csv(args.out, result, err_mu, err_alpha)
    return EXIT_OK


def cmd_estimate(args) -> int:
    return _estimate_flow(args, privatize_required=False)


def cmd_privatize(args) -> int:
    return _estimate_flow(args, privatize_required=True)


def cmd_sweep(args) -> int:
    config, _ = _config_from_args(args)
    out_dir = _ensure_out_dir(config)
    records = run_sweep(config, workers=args.workers)
    sweep_path = os.path.join(out_dir, "sweep.csv")
    write_sweep_csv(records, sweep_path)
    summary = summarize_sweep(records)
    write_summary_csv(summary, os.path.join(out_dir, "sweep_summary.csv"))
    emit_plot_script(os.path.join(out_dir, "plot_sweep.py"))
    grid = [r for r in records if r.b_mode != BASELINE_B_MODE]
    n_ok = sum(r.converged for r in grid)
    print(f"wrote {len(records)} records to {sweep_path} "
          f"({n_ok}/{len(grid)} grid cells converged)")
    for row in summary:
        eps = "inf" if math.isinf(row["epsilon"]) else f"{row['epsilon']:g}"
        mean = "-" if row["mean_err_alpha"] is None else f"{row['mean_err_alpha']:.4g}"
        print(f"  eps={eps:<6} B={row['b_mode']:<5} converged={row['n_converged']:>3}"
              f"/{row['n']:<3} mean E_alpha={mean}")
    if grid and n_ok == 0:
        print("all sweep cells failed", file=sys.stderr)
        return EXIT_ALL_FAILED
    return EXIT_OK


def cmd_time_to_threshold(args) -> int:
    config, _ = _config_from_args(args)
    out_dir = _ensure_out_dir(config)
    cells = run_time_to_threshold(config, args.threshold,
                                  t_min=args.t_min, t_max=args.t_max)
    path = os.path.join(out_dir, "time_to_threshold.csv")
    write_threshold_csv(cells, path)
    print(f"wrote {len(cells)} cells to {path}")
    for c in cells:
        status = "capped" if c.capped else f"T={c.required_t:g}"
        print(f"  eps={c.epsilon:<6g} B={c.b_mode:<5} {status}")
    return EXIT_OK


def cmd_complexity(args) -> int:
    config, _ = _config_from_args(args)
    eta4 = args.eta4
    if eta4 is None:
        if args.eta4_bins is None:
            raise ConfigError("either --eta4 or --eta4_bins is required")
        est = eta4_monte_carlo(config.params, args.delta_bin, args.eta4_bins, config.seed)
        eta4 = est.value
        print(f"eta4 Monte-Carlo estimate: {est.value:.6g} (se {est.std_error:.3g})")
    inputs = ComplexityInputs(bounds=config.bounds, xi=args.xi,
                              delta_prob=args.delta_prob, delta_bin=args.delta_bin,
                              eta4=eta4, sigma_sq=args.sigma_sq, c=args.c)
    if args.private:
        if args.epsilon is None:
            raise ConfigError("--epsilon is required for the private bound")
        budget = PrivacyBudget(epsilon=args.epsilon / 2.0, gamma=config.gamma)
        b = None if args.b in (None, "auto") else int(args.b)
        report = required_T_private(inputs, budget, relation_aware_b=b,
                                    constants=args.constants)
    else:
        report = required_T_nonprivate(inputs, constants=args.constants)
    print(f"required T = {report.required_T:.6g} (binding term: {report.binding_term})")
    for label, value in report.all_terms:
        print(f"  {label:<20} {value:.6g}")
    if args.out:
        write_complexity_csv(report, args.out)
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_tree_stats(args) -> int:
    config, _ = _config_from_args(args)
    events = _load_events(args.input, args.horizon)
    stats = tree_sizes(events)
    out = args.out or os.path.join(_ensure_out_dir(config), "tree_stats.csv")
    write_tree_csv(stats, out)
    mean_size = float(stats.sizes.mean()) if stats.num_trees else float("nan")
    print(f"{stats.num_trees} trees, mean in-window size {mean_size:.4g}; wrote {out}")
    return EXIT_OK


def cmd_ingest(args) -> int:
    config, _ = _config_from_args(args)
    events = ingest_timestamps(args.input, time_unit_scale=args.scale)
    out = args.out or os.path.join(_ensure_out_dir(config), "ingested.csv")
    write_events_csv(events, out)
    _write_meta(out + ".meta", {"source": args.input, "scale": f"{args.scale:.17g}",
                                "horizon": f"{events.horizon:.17g}"})
    print(f"ingested {len(events)} events, horizon {events.horizon:g}; wrote {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dphawkes",
        description="Hawkes simulation, moment estimation, and private release")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate an event sequence to CSV")
    _add_config_flags(p)
    p.add_argument("--out", help="output events CSV (default <out_dir>/events.csv)")
    p.add_argument("--algorithm", choices=("branching", "thinning"), default="branching")
    p.add_argument("--warmup", type=float, default=None)
    p.set_defaults(func=cmd_simulate)

    for name, func, eps_required in (("estimate", cmd_estimate, False),
                                     ("privatize", cmd_privatize, True)):
        p = sub.add_parser(name, help=f"{name} parameters from an events CSV")
        _add_config_flags(p)
        p.add_argument("input", help="events CSV (header timestamp,tree_id,parent_idx)")
        p.add_argument("--epsilon", type=float, default=None,
                       help="total privacy budget (halved per statistic)")
        p.add_argument("--b", default="10",
                       help="maximum tree size, or 'auto' for relation-unaware")
        p.add_argument("--out", help="write a one-row result CSV here")
        p.set_defaults(func=func)

    p = sub.add_parser("sweep", help="privacy-utility sweep over (epsilon, B)")
    _add_config_flags(p)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("time-to-threshold",
                       help="doubling search for the horizon reaching an error target")
    _add_config_flags(p)
    p.add_argument("--threshold", type=float, required=True,
                   help="target normalized alpha error")
    p.add_argument("--t_min", type=float, default=12500.0)
    p.add_argument("--t_max", type=float, default=1e6)
    p.set_defaults(func=cmd_time_to_threshold)

    p = sub.add_parser("complexity", help="evaluate the sample-complexity bounds")
    _add_config_flags(p)
    p.add_argument("--xi", type=float, required=True)
    p.add_argument("--delta_prob", type=float, required=True)
    p.add_argument("--delta_bin", type=float, required=True)
    p.add_argument("--sigma_sq", type=float, required=True)
    p.add_argument("--eta4", type=float, default=None)
    p.add_argument("--eta4_bins", type=int, default=None,
                   help="Monte-Carlo bins for eta4 when --eta4 is absent")
    p.add_argument("--c", type=float, default=None, help="Delta = c*log(T) constant")
    p.add_argument("--private", action="store_true")
    p.add_argument("--epsilon", type=float, default=None, help="total privacy budget")
    p.add_argument("--b", default=None, help="known maximum tree size, or 'auto'")
    p.add_argument("--constants", choices=("theorem", "appendix"), default="theorem")
    p.add_argument("--out", help="write the term table CSV here")
    p.set_defaults(func=cmd_complexity)

    p = sub.add_parser("tree-stats", help="tree-size histogram of a labeled CSV")
    _add_config_flags(p)
    p.add_argument("input")
    p.add_argument("--out")
    p.set_defaults(func=cmd_tree_stats)

    p = sub.add_parser("ingest", help="normalize a raw timestamp CSV")
    _add_config_flags(p)
    p.add_argument("input")
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ingest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, PreconditionViolated) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NonConvergence, HorizonTooShort) as exc:
        print(f"estimation failed: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
