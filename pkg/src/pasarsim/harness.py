"""Experiment orchestration: seeded Monte Carlo sweeps and persistent results.

A sweep is the cross product of schemes, average SNRs, packet payloads, and
prune rates.  Every grid point runs R sessions whose seeds derive only from
(base_seed, run_index), so matched run indices share fading realizations across
schemes, SNRs, and prune rates; aggregation uses sums and so is independent of
execution order.  Rows are written as CSV in a fixed column order next to a
JSON manifest that echoes the configuration.
"""

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .channel import ChannelConfig, McsConfig, mcs_for_packet_bits, normalize_scheme
from .errors import ConfigError, DomainError, FormatError
from .lossmodel import predicted_model_loss
from .protocol import SessionConfig, run_session
from .channel import expected_oneshot_ber
from .sensitivity import (DEFAULT_DISTRIBUTION, SensitivityTable, load_table,
                          packetize, parse_distribution, prune,
                          synthesize_table)

RESULT_COLUMNS = (
    "scheme", "snr_db", "packet_bits", "prune_rate", "mean_t_total",
    "stddev_t_total", "failure_rate", "mean_realized_loss", "mean_rounds", "runs",
)

DEFAULT_MODEL_DIMENSION = 12_500
DEFAULT_T_MAX = 25_000
DEFAULT_TARGET_FRACTION = 1.25


@dataclass(frozen=True)
class BudgetSpec:
    """Either an absolute budget or a calibration rule.

    With `target_fraction`, the budget is that fraction of the expected
    one-transmission downloading loss; `ref_snr_db` pins the calibration
    channel (one budget for the whole sweep), otherwise each grid point
    calibrates at its own SNR.
    """

    beta_total: Optional[float] = None
    target_fraction: Optional[float] = None
    ref_snr_db: Optional[float] = None

    def __post_init__(self):
        if (self.beta_total is None) == (self.target_fraction is None):
            raise ConfigError("budget needs exactly one of beta_total/target_fraction")
        if self.beta_total is not None and self.beta_total < 0:
            raise ConfigError("beta_total must be non-negative")
        if self.target_fraction is not None and not self.target_fraction > 0:
            raise ConfigError("target_fraction must be positive")


@dataclass(frozen=True)
class ExperimentConfig:
    schemes: tuple = ("pasar", "harq-i", "harq-cc", "harq-ir")
    snr_grid_db: tuple = (-5.0, 0.0, 5.0, 10.0)
    packet_bits_grid: tuple = (1000,)
    prune_rates: tuple = (0.0,)
    budget: BudgetSpec = field(default_factory=lambda: BudgetSpec(
        target_fraction=DEFAULT_TARGET_FRACTION, ref_snr_db=-5.0))
    runs: int = 500
    base_seed: int = 1
    t_max: int = DEFAULT_T_MAX
    budget_model: str = "eq13"
    ber_mode: str = "analytic"
    modulation_order: int = 4
    code_rate: float = 0.5
    coding_gain_db: Optional[float] = None
    sensitivity_file: Optional[str] = None
    synthetic: Optional[dict] = None  # {"kind": ..., "d": ..., "seed": ...}
    output_path: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "schemes",
                           tuple(normalize_scheme(s) for s in self.schemes))
        object.__setattr__(self, "snr_grid_db", tuple(float(x) for x in self.snr_grid_db))
        object.__setattr__(self, "packet_bits_grid",
                           tuple(int(x) for x in self.packet_bits_grid))
        object.__setattr__(self, "prune_rates", tuple(float(x) for x in self.prune_rates))
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if not (self.schemes and self.snr_grid_db and self.packet_bits_grid
                and self.prune_rates):
            raise ConfigError("schemes and sweep grids must be non-empty")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        raw = dict(raw)
        budget_raw = raw.pop("budget", None)
        if isinstance(budget_raw, dict):
            budget = BudgetSpec(
                beta_total=budget_raw.get("beta_total"),
                target_fraction=budget_raw.get("target_fraction"),
                ref_snr_db=budget_raw.get("ref_snr_db"),
            )
        elif isinstance(budget_raw, (int, float)):
            budget = BudgetSpec(beta_total=float(budget_raw))
        elif budget_raw is None:
            budget = BudgetSpec(target_fraction=DEFAULT_TARGET_FRACTION,
                                ref_snr_db=-5.0)
        else:
            raise ConfigError(f"unusable budget spec {budget_raw!r}")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("schemes", "snr_grid_db", "packet_bits_grid", "prune_rates"):
            if key in raw:
                raw[key] = tuple(raw[key])
        return cls(budget=budget, **raw)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise FormatError(f"config {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(raw)


@dataclass(frozen=True)
class ResultRow:
    scheme: str
    snr_db: float
    packet_bits: int
    prune_rate: float
    mean_t_total: float
    stddev_t_total: float
    failure_rate: float
    mean_realized_loss: float
    mean_rounds: float
    runs: int


def base_table(config: ExperimentConfig) -> SensitivityTable:
    """The unpruned sensitivity table named by the config."""
    if config.sensitivity_file:
        return load_table(config.sensitivity_file)
    spec = dict(config.synthetic or {})
    d = int(spec.pop("d", DEFAULT_MODEL_DIMENSION))
    seed = int(spec.pop("seed", 0))
    dist = parse_distribution(spec) if spec else DEFAULT_DISTRIBUTION
    return synthesize_table(d, dist, seed)


def build_mcs(config: ExperimentConfig, packet_bits: int,
              quant_bits: int = 8) -> McsConfig:
    return mcs_for_packet_bits(packet_bits, quant_bits=quant_bits,
                               modulation_order=config.modulation_order,
                               code_rate=config.code_rate,
                               coding_gain_db=config.coding_gain_db)


def calibrate_budget(table: SensitivityTable, mcs: McsConfig,
                     channel: ChannelConfig, target_fraction: float) -> float:
    """Budget as a fraction of the expected single-transmission loss.

    The reference point is the mean one-attempt BER of the given channel
    applied to every packet, i.e. the loss a no-retransmission download is
    expected to incur.
    """
    if not target_fraction > 0:
        raise DomainError("target_fraction must be positive")
    ber = expected_oneshot_ber(channel)
    packets = packetize(table, mcs)
    loss = predicted_model_loss([(p.sensitivity, ber) for p in packets],
                                mcs.quant_bits)
    return target_fraction * loss


def resolve_budget(config: ExperimentConfig, table: SensitivityTable,
                   mcs: McsConfig, snr_db: float) -> float:
    """Budget for one grid point.

    Calibration always uses the unpruned table: the budget expresses what the
    full download may lose, and holding it fixed across prune rates is what
    makes those comparisons meaningful.
    """
    spec = config.budget
    if spec.beta_total is not None:
        return spec.beta_total
    ref = snr_db if spec.ref_snr_db is None else spec.ref_snr_db
    return calibrate_budget(table, mcs, ChannelConfig(avg_snr_db=ref, mcs=mcs),
                            spec.target_fraction)


def _run_chunk(args):
    session_config, table, run_indices, base_seed = args
    stats = np.zeros(5)  # sum_t, sum_t2, failures, sum_realized, sum_rounds
    for run_idx in run_indices:
        seed = int(np.random.SeedSequence([base_seed, run_idx])
                   .generate_state(1, dtype=np.uint64)[0])
        result = run_session(replace(session_config, seed=seed), table)
        stats += (result.t_total, result.t_total**2, 0.0 if result.success else 1.0,
                  result.realized_loss, result.rounds)
    return stats


def run_experiment(config: ExperimentConfig,
                   progress=None) -> list:
    """Run the full sweep and return one ResultRow per grid point."""
    table0 = base_table(config)
    rows = []
    grid = [(b, r) for b in config.packet_bits_grid for r in config.prune_rates]
    prepared = {}
    for packet_bits, rate in grid:
        mcs = build_mcs(config, packet_bits, quant_bits=table0.quant_bits)
        packetize(prune(table0, rate), mcs)  # surface capacity errors up front
        prepared[(packet_bits, rate)] = (mcs, prune(table0, rate))

    for packet_bits, rate in grid:
        mcs, pruned = prepared[(packet_bits, rate)]
        for snr_db in config.snr_grid_db:
            beta = resolve_budget(config, table0, mcs, snr_db)
            chan = ChannelConfig(avg_snr_db=snr_db, mcs=mcs)
            for scheme in config.schemes:
                session = SessionConfig(
                    scheme=scheme, beta_total=beta, t_max=config.t_max,
                    channel=chan, budget_model=config.budget_model,
                    ber_mode=config.ber_mode, seed=0)
                rows.append(_aggregate(config, session, pruned, scheme, snr_db,
                                       packet_bits, rate))
                if progress is not None:
                    progress(rows[-1])
    return rows


def _aggregate(config: ExperimentConfig, session: SessionConfig,
               table: SensitivityTable, scheme: str, snr_db: float,
               packet_bits: int, rate: float) -> ResultRow:
    runs = config.runs
    indices = list(range(runs))
    if config.workers > 1 and runs >= 2 * config.workers:
        chunks = np.array_split(indices, config.workers * 4)
        args = [(session, table, [int(i) for i in chunk], config.base_seed)
                for chunk in chunks if len(chunk)]
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            totals = sum(pool.map(_run_chunk, args))
    else:
        totals = _run_chunk((session, table, indices, config.base_seed))

    sum_t, sum_t2, failures, sum_loss, sum_rounds = totals
    mean_t = sum_t / runs
    var = max(0.0, (sum_t2 - runs * mean_t**2) / (runs - 1)) if runs > 1 else 0.0
    return ResultRow(
        scheme=scheme, snr_db=snr_db, packet_bits=packet_bits, prune_rate=rate,
        mean_t_total=mean_t, stddev_t_total=float(np.sqrt(var)),
        failure_rate=failures / runs, mean_realized_loss=sum_loss / runs,
        mean_rounds=sum_rounds / runs, runs=runs)


def latency_reduction(scheme_rows: Sequence[ResultRow],
                      baseline_rows: Sequence[ResultRow]) -> list:
    """Percent latency saved by `scheme` against `baseline`, per grid point."""
    def key(row):
        return (row.snr_db, row.packet_bits, row.prune_rate)

    baseline = {key(r): r for r in baseline_rows}
    if len(baseline) != len(baseline_rows):
        raise DomainError("duplicate grid points among baseline rows")
    if set(key(r) for r in scheme_rows) != set(baseline):
        raise DomainError("scheme and baseline rows cover different grid points")
    out = []
    for row in scheme_rows:
        ref = baseline[key(row)]
        if ref.mean_t_total <= 0:
            raise DomainError("baseline latency must be positive")
        out.append({
            "snr_db": row.snr_db,
            "packet_bits": row.packet_bits,
            "prune_rate": row.prune_rate,
            "scheme": row.scheme,
            "baseline": ref.scheme,
            "reduction_pct": 100.0 * (ref.mean_t_total - row.mean_t_total)
                             / ref.mean_t_total,
        })
    return out


def write_rows_csv(rows: Sequence[ResultRow], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for row in rows:
            record = asdict(row)
            writer.writerow([record[c] for c in RESULT_COLUMNS])


def read_rows_csv(path) -> list:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != list(RESULT_COLUMNS):
            raise FormatError(f"{path} is not a sweep result file")
        for rec in reader:
            rows.append(ResultRow(
                scheme=rec["scheme"], snr_db=float(rec["snr_db"]),
                packet_bits=int(rec["packet_bits"]),
                prune_rate=float(rec["prune_rate"]),
                mean_t_total=float(rec["mean_t_total"]),
                stddev_t_total=float(rec["stddev_t_total"]),
                failure_rate=float(rec["failure_rate"]),
                mean_realized_loss=float(rec["mean_realized_loss"]),
                mean_rounds=float(rec["mean_rounds"]), runs=int(rec["runs"])))
    return rows


def write_manifest(config: ExperimentConfig, rows: Sequence[ResultRow],
                   path) -> None:
    manifest = {
        "artifact_version": __version__,
        "config": _config_dict(config),
        "rows": [
            {"row_index": i, "scheme": r.scheme, "snr_db": r.snr_db,
             "packet_bits": r.packet_bits, "prune_rate": r.prune_rate,
             "runs": r.runs, "seed_entropy": [config.base_seed, "run_index"]}
            for i, r in enumerate(rows)
        ],
    }
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _config_dict(config: ExperimentConfig) -> dict:
    record = asdict(config)
    record["budget"] = asdict(config.budget)
    return record
