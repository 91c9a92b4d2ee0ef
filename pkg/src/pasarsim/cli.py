"""Command-line entry points.

Subcommands: `run` executes a sweep from a JSON config (flags override single
fields), `stats` summarizes a sensitivity file, `calibrate` prints the budgets
a config resolves to, `oracle-check` stress-tests the stopping rule against
the exhaustive selector, `synth` writes synthetic tables, and `report` renders
figures from a result CSV.
"""

import argparse
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import __version__
from .controller import brute_force_oracle, greedy_oracle, pasar_round, ControlState
from .errors import ConfigError, DomainError, FormatError, StateError
from .harness import (ExperimentConfig, BudgetSpec, base_table, build_mcs,
                      resolve_budget, run_experiment, write_manifest,
                      write_rows_csv)
from .quantcodec import loss_scale
from .sensitivity import (load_table, parse_distribution, stats,
                          synthesize_table, write_csv, write_psns)


def _add_run_overrides(parser):
    parser.add_argument("--seed", type=int, help="override base_seed")
    parser.add_argument("--runs", type=int, help="override runs per grid point")
    parser.add_argument("--output", help="override output CSV path")
    parser.add_argument("--scheme", action="append",
                        help="restrict to a scheme (repeatable)")
    parser.add_argument("--snr-db", type=float, action="append",
                        help="restrict the SNR grid (repeatable)")
    parser.add_argument("--packet-bits", type=int, action="append",
                        help="restrict the payload grid (repeatable)")
    parser.add_argument("--prune-rate", type=float, action="append",
                        help="restrict the prune-rate grid (repeatable)")
    parser.add_argument("--budget", type=float,
                        help="absolute loss budget, replacing any calibration rule")
    parser.add_argument("--budget-model", choices=("eq13", "averaged"))
    parser.add_argument("--ber-mode", choices=("analytic", "empirical"))
    parser.add_argument("--workers", type=int)


def _apply_overrides(config: ExperimentConfig, args) -> ExperimentConfig:
    updates = {}
    if args.seed is not None:
        updates["base_seed"] = args.seed
    if args.runs is not None:
        updates["runs"] = args.runs
    if args.output is not None:
        updates["output_path"] = args.output
    if args.scheme:
        updates["schemes"] = tuple(args.scheme)
    if args.snr_db:
        updates["snr_grid_db"] = tuple(args.snr_db)
    if args.packet_bits:
        updates["packet_bits_grid"] = tuple(args.packet_bits)
    if args.prune_rate:
        updates["prune_rates"] = tuple(args.prune_rate)
    if args.budget is not None:
        updates["budget"] = BudgetSpec(beta_total=args.budget)
    if args.budget_model is not None:
        updates["budget_model"] = args.budget_model
    if args.ber_mode is not None:
        updates["ber_mode"] = args.ber_mode
    if args.workers is not None:
        updates["workers"] = args.workers
    return replace(config, **updates) if updates else config


def _cmd_run(args) -> int:
    config = ExperimentConfig.from_json(args.config)
    config = _apply_overrides(config, args)
    out = Path(config.output_path or "results.csv")
    done = []

    def progress(row):
        done.append(row)
        print(f"[{len(done)}] {row.scheme:8s} snr={row.snr_db:+.1f} dB "
              f"bits={row.packet_bits} prune={row.prune_rate:g} "
              f"mean_t={row.mean_t_total:.1f} fail={row.failure_rate:.3f}",
              flush=True)

    rows = run_experiment(config, progress=progress)
    write_rows_csv(rows, out)
    write_manifest(config, rows, out.with_suffix(".manifest.json"))
    print(f"wrote {len(rows)} rows to {out}")
    return 0


def _cmd_stats(args) -> int:
    table = load_table(args.sensitivity)
    summary = stats(table)
    print(f"model:      {table.model_name}")
    print(f"dimension:  {table.dimension}")
    print(f"quant_bits: {table.quant_bits}")
    for key, value in asdict(summary).items():
        print(f"{key + ':':11s} {value}")
    return 0


def _cmd_calibrate(args) -> int:
    config = ExperimentConfig.from_json(args.config)
    table = base_table(config)
    for packet_bits in config.packet_bits_grid:
        mcs = build_mcs(config, packet_bits, quant_bits=table.quant_bits)
        for snr_db in config.snr_grid_db:
            beta = resolve_budget(config, table, mcs, snr_db)
            print(f"packet_bits={packet_bits} snr_db={snr_db:+.1f} "
                  f"beta_total={beta:.6g}")
    return 0


def _cmd_oracle_check(args) -> int:
    if args.max_size > 20:
        raise DomainError("oracle-check caps instance size at 20")
    rng = np.random.default_rng(args.seed)
    n_bits = 8
    alpha = loss_scale(n_bits)
    mismatches = 0
    for _ in range(args.instances):
        size = int(rng.integers(1, args.max_size + 1))
        costs = rng.random(size)
        budget = float(rng.uniform(0.0, costs.sum()))
        sens = costs / alpha  # so cost = alpha * s * 1.0
        cost_map = {j: (float(sens[j]), 1.0) for j in range(size)}
        eff = [alpha * sens[j] * 1.0 for j in range(size)]
        decision = pasar_round(ControlState(frozenset(range(size)), budget),
                               cost_map, n_bits)
        greedy = greedy_oracle(eff, budget)
        exact = brute_force_oracle(eff, budget)
        if sorted(decision.ack) != greedy or len(decision.ack) != exact:
            mismatches += 1
    print(f"{args.instances} instances, {mismatches} mismatches")
    return 0 if mismatches == 0 else 1


def _cmd_synth(args) -> int:
    dist = parse_distribution({
        "kind": args.dist, "mu": args.mu, "sigma": args.sigma,
        "rate": args.rate, "value": args.value,
    })
    table = synthesize_table(args.d, dist, args.seed, quant_bits=args.quant_bits)
    out = Path(args.out)
    if out.suffix.lower() == ".csv":
        write_csv(table, out)
    else:
        write_psns(table, out)
    print(f"wrote {table.dimension}-entry table to {out}")
    return 0


def _cmd_report(args) -> int:
    from .reporting import render_report  # matplotlib import kept lazy

    written = render_report(args.results, args.out)
    for path in written:
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pasarsim",
        description="Sensitivity-aware retransmission link simulator")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a sweep from a JSON config")
    p_run.add_argument("--config", required=True)
    _add_run_overrides(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_stats = sub.add_parser("stats", help="summarize a sensitivity table")
    p_stats.add_argument("--sensitivity", required=True)
    p_stats.set_defaults(func=_cmd_stats)

    p_cal = sub.add_parser("calibrate", help="print resolved loss budgets")
    p_cal.add_argument("--config", required=True)
    p_cal.set_defaults(func=_cmd_calibrate)

    p_oracle = sub.add_parser("oracle-check",
                              help="verify the stopping rule against oracles")
    p_oracle.add_argument("--instances", type=int, default=1000)
    p_oracle.add_argument("--max-size", type=int, default=12)
    p_oracle.add_argument("--seed", type=int, default=0)
    p_oracle.set_defaults(func=_cmd_oracle_check)

    p_synth = sub.add_parser("synth", help="write a synthetic sensitivity table")
    p_synth.add_argument("--dist", default="lognormal",
                         choices=("lognormal", "exponential", "constant"))
    p_synth.add_argument("--d", type=int, default=12500)
    p_synth.add_argument("--mu", type=float, default=0.0)
    p_synth.add_argument("--sigma", type=float, default=1.2)
    p_synth.add_argument("--rate", type=float, default=1.0)
    p_synth.add_argument("--value", type=float, default=1.0)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--quant-bits", type=int, default=8)
    p_synth.add_argument("--out", required=True)
    p_synth.set_defaults(func=_cmd_synth)

    p_report = sub.add_parser("report", help="render figures from a result CSV")
    p_report.add_argument("--results", required=True)
    p_report.add_argument("--out", default="report")
    p_report.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DomainError, FormatError, StateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
