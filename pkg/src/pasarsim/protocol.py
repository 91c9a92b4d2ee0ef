"""Round-based retransmission sessions.

Each round transmits every active packet once, the device updates per-packet
average BERs and runs the configured stopping rule, and the server keeps the
nacked packets active.  Terminated packets assemble as the element-wise mean
of all decoded copies.  A session ends in success when the active set empties
within the transmission cap, otherwise in failure; either way the model is
assembled from whatever copies arrived.

Reproducibility: all randomness is derived from the session seed through three
independent substreams (parameter draw, per-round fades, per-round bit flips),
so a config replays bit-identically and schemes sharing a seed see the same
fading realizations.  Fades are drawn for every packet slot each round, active
or not, which keeps realizations aligned across schemes and table variants.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import channel as ch
from .controller import (BUDGET_SLACK_REL, ControlState, pasar_round,
                         uniform_round)
from .errors import ConfigError, DomainError
from .lossmodel import combine_receptions, realized_model_loss
from .quantcodec import decode_words, encode_words
from .sensitivity import SensitivityTable, packetize

_STREAM_PARAMS = 0
_STREAM_FADE = 1
_STREAM_FLIPS = 2

BUDGET_MODELS = ("eq13", "averaged")
BER_MODES = ("analytic", "empirical")


@dataclass(frozen=True)
class SessionConfig:
    """Everything one downloading session needs besides the table itself."""

    scheme: str
    beta_total: float
    t_max: int
    channel: ch.ChannelConfig
    budget_model: str = "eq13"
    ber_mode: str = "analytic"
    seed: int = 0
    record_copies: bool = False

    def __post_init__(self):
        object.__setattr__(self, "scheme", ch.normalize_scheme(self.scheme))
        if self.t_max < 1:
            raise ConfigError("t_max must be >= 1")
        if self.beta_total < 0:
            raise ConfigError("loss budget must be non-negative")
        if self.budget_model not in BUDGET_MODELS:
            raise ConfigError(f"budget_model must be one of {BUDGET_MODELS}")
        if self.ber_mode not in BER_MODES:
            raise ConfigError(f"ber_mode must be one of {BER_MODES}")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")


@dataclass(frozen=True)
class SessionResult:
    """Outcome of one session."""

    t_total: int
    per_packet_attempts: tuple
    success: bool
    realized_loss: float
    predicted_loss_consumed: float
    rounds: int
    ack_trace: tuple = ()
    receptions: Optional[list] = field(default=None, compare=False)


def _substream(seed: int, stream: int, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, stream, index]))


def draw_original_params(seed: int, d: int, n: int) -> np.ndarray:
    """Uniform draw over the full n-bit signed range, from the session seed."""
    rng = _substream(seed, _STREAM_PARAMS)
    lo, hi = -(1 << (n - 1)), (1 << (n - 1)) - 1
    return rng.integers(lo, hi + 1, size=d, dtype=np.int64)


def assemble(receptions: Sequence[Sequence[np.ndarray]], table: SensitivityTable,
             original: np.ndarray) -> tuple:
    """Average each packet's copies into a parameter vector and score it.

    Packets with no copies at all (possible only when the session died before
    their first transmission) assemble as zeros.
    """
    pieces = []
    for copies in receptions:
        if len(copies) == 0:
            pieces.append(None)
        else:
            pieces.append(combine_receptions(copies))
    sizes = [p.size if p is not None else None for p in pieces]
    # Infer missing sizes from the table length and the known pieces.
    known = sum(s for s in sizes if s is not None)
    missing = sizes.count(None)
    if missing:
        remainder = table.dimension - known
        if remainder < 0 or remainder % missing:
            raise DomainError("cannot infer sizes of packets with no copies")
        for i, s in enumerate(sizes):
            if s is None:
                pieces[i] = np.zeros(remainder // missing)
    assembled = np.concatenate(pieces)
    return assembled, realized_model_loss(table, original, assembled)


def run_session(config: SessionConfig, table: SensitivityTable,
                original_params: Optional[np.ndarray] = None) -> SessionResult:
    """Execute one downloading session and return its ledger."""
    mcs = config.channel.mcs
    n = mcs.quant_bits
    d = table.dimension
    if original_params is None:
        original_params = draw_original_params(config.seed, d, n)
    original_params = np.asarray(original_params, dtype=np.int64)
    if original_params.shape != (d,):
        raise DomainError("original parameter vector must match the table dimension")
    words = encode_words(original_params, n)  # validates representability

    packets = packetize(table, mcs)
    j_total = len(packets)
    s = np.array([p.sensitivity for p in packets])
    starts = np.array([p.param_range[0] for p in packets])
    stops = np.array([p.param_range[1] for p in packets])
    sizes = stops - starts
    param_ids = np.arange(d)

    scheme = config.scheme
    snr_lin = config.channel.snr_linear
    slack = BUDGET_SLACK_REL * config.beta_total

    active = np.arange(j_total)
    beta_res = float(config.beta_total)
    sum_stat = np.zeros(j_total)
    attempts = np.zeros(j_total, dtype=np.int64)
    cc_sum = np.zeros(j_total)
    ir_prod = np.ones(j_total)
    copy_sums = np.zeros(d)
    receptions = [[] for _ in range(j_total)] if config.record_copies else None

    trace = []
    total = 0
    rounds = 0
    t = 1
    with np.errstate(over="ignore"):  # IR products may saturate to inf harmlessly
        while active.size and total + active.size <= config.t_max:
            # One fade per packet slot, active or not, for cross-run alignment.
            rel = _substream(config.seed, _STREAM_FADE, t).exponential(size=j_total)
            gamma = rel[active] * snr_lin

            cc_sum[active] += gamma
            ir_prod[active] *= 1.0 + gamma
            if scheme == ch.SCHEME_HARQ_CC:
                eff = cc_sum[active]
            elif scheme == ch.SCHEME_HARQ_IR:
                eff = ir_prod[active] - 1.0
            else:
                eff = gamma
            ber = np.clip(ch.coded_ber(eff, mcs), 0.0, ch.BER_CEILING)

            # Realize the bit flips of every decoded copy at this attempt's BER.
            act_sizes = sizes[active]
            sel = np.concatenate([param_ids[starts[j]:stops[j]] for j in active])
            p_flip = np.repeat(ber, act_sizes)
            flip_rng = _substream(config.seed, _STREAM_FLIPS, t)
            flipped = flip_rng.random((sel.size, n), dtype=np.float32) < p_flip[:, None]
            weights = np.uint64(1) << np.arange(n, dtype=np.uint64)
            masks = (flipped.astype(np.uint64) * weights).sum(axis=1, dtype=np.uint64)
            decoded = decode_words(words[sel] ^ masks, n)
            copy_sums[sel] += decoded
            if receptions is not None:
                offsets = np.concatenate([[0], np.cumsum(act_sizes)])
                for k, j in enumerate(active):
                    receptions[j].append(decoded[offsets[k]:offsets[k + 1]].copy())

            if config.ber_mode == "empirical":
                # Per-packet flip-rate estimate: flipped bits / payload bits.
                flips_per_param = flipped.sum(axis=1)
                bounds = np.concatenate([[0], np.cumsum(act_sizes)])
                counts = np.add.reduceat(flips_per_param, bounds[:-1])
                stat_round = counts / (act_sizes * n)
            else:
                stat_round = ber

            total += active.size
            rounds += 1
            attempts[active] += 1
            sum_stat[active] += stat_round
            p_bar = sum_stat[active] / attempts[active]
            if config.budget_model == "averaged":
                statistic = p_bar / attempts[active]
            else:
                statistic = p_bar

            active_list = [int(j) for j in active]
            if scheme == ch.SCHEME_PASAR:
                costs = {j: (float(s[j]), float(statistic[k]))
                         for k, j in enumerate(active_list)}
                decision = pasar_round(
                    ControlState(active=frozenset(active_list), beta_res=beta_res),
                    costs, n, slack=slack)
            else:
                avg = {j: float(statistic[k]) for k, j in enumerate(active_list)}
                decision = uniform_round(active_list, avg, s, config.beta_total, n,
                                         beta_res=beta_res)
            beta_res = max(0.0, decision.beta_res_next)
            trace.append(tuple(sorted(decision.ack)))
            active = np.array(sorted(decision.nack), dtype=np.int64)
            t += 1

    success = active.size == 0
    per_param_attempts = np.repeat(attempts, sizes).astype(np.float64)
    assembled = np.zeros(d)
    mask = per_param_attempts > 0
    assembled[mask] = copy_sums[mask] / per_param_attempts[mask]
    realized = realized_model_loss(table, original_params, assembled)

    return SessionResult(
        t_total=int(attempts.sum()),
        per_packet_attempts=tuple(int(a) for a in attempts),
        success=success,
        realized_loss=realized,
        predicted_loss_consumed=float(config.beta_total - beta_res),
        rounds=rounds,
        ack_trace=tuple(trace),
        receptions=receptions,
    )
