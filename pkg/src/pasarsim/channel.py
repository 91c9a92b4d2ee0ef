"""Rayleigh block fading, analytic coded-BER mapping, and HARQ combining.

One fade is drawn per packet per attempt and held constant over the packet.
The code abstraction maps post-fading SNR through a coding-gain offset and a
Gray-coded QAM bit-error approximation, clamped to the binary-symmetric-channel
ceiling of 1/2.  Chase combining adds attempt SNRs; incremental redundancy
accumulates mutual information, expressed as an equivalent SNR.
"""

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate, special

from .errors import ConfigError, DomainError

SCHEME_PASAR = "pasar"
SCHEME_HARQ_I = "harq-i"
SCHEME_HARQ_CC = "harq-cc"
SCHEME_HARQ_IR = "harq-ir"
SCHEMES = (SCHEME_PASAR, SCHEME_HARQ_I, SCHEME_HARQ_CC, SCHEME_HARQ_IR)

VALID_MODULATIONS = (2, 4, 16, 64, 256)

#: Coding-gain offsets (dB) standing in for the decoder at common code rates.
DEFAULT_CODING_GAIN_DB = {1 / 2: 6.0, 2 / 3: 5.0, 3 / 4: 4.0, 5 / 6: 3.0}

BER_CEILING = 0.5


def normalize_scheme(name: str) -> str:
    key = str(name).strip().lower().replace("_", "-")
    aliases = {"harqi": SCHEME_HARQ_I, "harqcc": SCHEME_HARQ_CC, "harqir": SCHEME_HARQ_IR}
    key = aliases.get(key.replace("-", ""), key)
    if key not in SCHEMES:
        raise ConfigError(f"unknown scheme {name!r}; expected one of {SCHEMES}")
    return key


def default_coding_gain_db(code_rate: float) -> float:
    for rate, gain in DEFAULT_CODING_GAIN_DB.items():
        if math.isclose(code_rate, rate, rel_tol=1e-9):
            return gain
    return 0.0


@dataclass(frozen=True)
class McsConfig:
    """Modulation order, code rate, and packet geometry."""

    modulation_order: int = 4
    code_rate: float = 0.5
    symbols_per_packet: int = 1000
    coding_gain_db: float = 6.0
    quant_bits: int = 8

    def __post_init__(self):
        if self.modulation_order not in VALID_MODULATIONS:
            raise ConfigError(
                f"modulation order must be one of {VALID_MODULATIONS}, "
                f"got {self.modulation_order}"
            )
        if not 0.0 < self.code_rate <= 1.0:
            raise ConfigError(f"code rate must be in (0, 1], got {self.code_rate}")
        if self.symbols_per_packet < 1:
            raise ConfigError("symbols_per_packet must be >= 1")
        if self.k_capacity < 1:
            raise ConfigError(
                "packet carries fewer information bits than one quantized parameter"
            )

    @property
    def bits_per_symbol(self) -> int:
        return int(math.log2(self.modulation_order))

    @property
    def info_bits_per_packet(self) -> int:
        return int(self.code_rate * self.symbols_per_packet * self.bits_per_symbol)

    @property
    def k_capacity(self) -> int:
        """Parameters that fit in one packet."""
        return int(self.code_rate * self.symbols_per_packet * self.bits_per_symbol
                   // self.quant_bits)


def mcs_for_packet_bits(packet_bits: int, quant_bits: int = 8,
                        modulation_order: int = 4, code_rate: float = 0.5,
                        coding_gain_db: float = None) -> McsConfig:
    """MCS whose payload carries `packet_bits` information bits."""
    bits_per_symbol = int(math.log2(modulation_order))
    symbols = math.ceil(packet_bits / (code_rate * bits_per_symbol))
    if coding_gain_db is None:
        coding_gain_db = default_coding_gain_db(code_rate)
    return McsConfig(modulation_order, code_rate, symbols, coding_gain_db, quant_bits)


@dataclass(frozen=True)
class ChannelConfig:
    """Long-term average SNR plus the agreed MCS."""

    avg_snr_db: float = 0.0
    mcs: McsConfig = field(default_factory=McsConfig)

    def __post_init__(self):
        if not math.isfinite(self.avg_snr_db):
            raise ConfigError("average SNR must be finite (in dB)")

    @property
    def snr_linear(self) -> float:
        return 10.0 ** (self.avg_snr_db / 10.0)


@dataclass(frozen=True)
class TransmissionOutcome:
    """One over-the-air attempt: the fade it saw and the BER it produced."""

    snr_linear: float
    ber: float
    attempt_index: int

    def __post_init__(self):
        if self.snr_linear < 0:
            raise DomainError("instantaneous SNR cannot be negative")
        if not 0.0 <= self.ber <= BER_CEILING:
            raise DomainError(f"BER {self.ber} outside [0, {BER_CEILING}]")


def draw_fade(config: ChannelConfig, rng: np.random.Generator) -> float:
    """Post-fading SNR for one attempt: |h|^2 ~ Exp(1) times the average SNR."""
    return float(rng.exponential()) * config.snr_linear


def draw_fades(config: ChannelConfig, rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.exponential(size=size) * config.snr_linear


def _qfunc(x):
    return 0.5 * special.erfc(np.asarray(x, dtype=np.float64) / np.sqrt(2.0))


def ber_uncoded_qam(gamma, modulation_order: int):
    """Gray-coded square-QAM bit-error approximation at symbol SNR gamma."""
    m = modulation_order
    if m == 2:
        return _qfunc(np.sqrt(2.0 * np.asarray(gamma, dtype=np.float64)))
    k = math.log2(m)
    scale = (4.0 / k) * (1.0 - 1.0 / math.sqrt(m))
    return scale * _qfunc(np.sqrt(3.0 * np.asarray(gamma, dtype=np.float64) / (m - 1)))


def coded_ber(gamma, mcs: McsConfig):
    """Post-decoder BER model: coding gain as an SNR offset, clamped to [0, 1/2].

    Monotone non-increasing in gamma.  Accepts scalars or arrays.
    """
    gamma = np.asarray(gamma, dtype=np.float64)
    if gamma.ndim == 0 and gamma < 0:
        raise DomainError("SNR must be non-negative")
    gain = 10.0 ** (mcs.coding_gain_db / 10.0)
    ber = np.clip(ber_uncoded_qam(gamma * gain, mcs.modulation_order), 0.0, BER_CEILING)
    return float(ber) if ber.ndim == 0 else ber


def combine_cc(history: Sequence[float]) -> float:
    """Chase combining: attempt SNRs add coherently."""
    if len(history) == 0:
        raise DomainError("cannot combine an empty attempt history")
    return float(np.sum(history))


def combine_ir(history: Sequence[float]) -> float:
    """Incremental redundancy: mutual information accumulates.

    Equivalent SNR solving sum(log2(1 + g_i)) = log2(1 + g_eff).
    """
    if len(history) == 0:
        raise DomainError("cannot combine an empty attempt history")
    return float(np.prod(1.0 + np.asarray(history, dtype=np.float64)) - 1.0)


def effective_snr(scheme: str, history: Sequence[float]) -> float:
    """SNR the decoder sees after the latest attempt, per scheme."""
    scheme = normalize_scheme(scheme)
    if scheme in (SCHEME_PASAR, SCHEME_HARQ_I):
        return float(history[-1])
    if scheme == SCHEME_HARQ_CC:
        return combine_cc(history)
    return combine_ir(history)


def attempt(scheme: str, history: list, config: ChannelConfig,
            rng: np.random.Generator) -> TransmissionOutcome:
    """Draw a fresh fade, append it to the history, and report the attempt BER."""
    gamma = draw_fade(config, rng)
    history.append(gamma)
    ber = coded_ber(effective_snr(scheme, history), config.mcs)
    return TransmissionOutcome(snr_linear=gamma, ber=float(ber),
                               attempt_index=len(history))


def expected_oneshot_ber(config: ChannelConfig) -> float:
    """Mean coded BER of a single attempt under the configured fading."""
    snr = config.snr_linear

    def integrand(u):
        return math.exp(-u) * coded_ber(u * snr, config.mcs)

    value, _ = integrate.quad(integrand, 0.0, np.inf, limit=200)
    return float(min(max(value, 0.0), BER_CEILING))
