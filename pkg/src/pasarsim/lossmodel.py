"""Downloading-loss accounting.

The expected model-loss increase from channel distortion is
loss_scale(n) * sum_j s_j * Pbar_j, where Pbar_j is the packet's average BER
over its attempts.  These helpers track per-packet ledgers, the global budget,
the averaging combiner on received copies, and the realized quadratic loss of
an assembled parameter vector.
"""

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, StateError
from .quantcodec import loss_scale
from .sensitivity import SensitivityTable


@dataclass
class BudgetState:
    """Global loss budget and what remains of it."""

    beta_total: float
    beta_res: float = None

    def __post_init__(self):
        if self.beta_total < 0:
            raise DomainError("loss budget must be non-negative")
        if self.beta_res is None:
            self.beta_res = float(self.beta_total)
        if not -1e-12 * max(self.beta_total, 1.0) <= self.beta_res <= self.beta_total:
            raise StateError("residual budget outside [0, beta_total]")

    def charge(self, cost: float) -> None:
        """Deduct a termination cost; clamps tiny negative residue to zero."""
        if cost < 0:
            raise DomainError("termination cost cannot be negative")
        self.beta_res = max(0.0, self.beta_res - cost)

    @property
    def consumed(self) -> float:
        return self.beta_total - self.beta_res


@dataclass
class PacketLedger:
    """BER history and bookkeeping for one packet."""

    packet_id: int
    ber_history: list = field(default_factory=list)
    consumed_loss: float = None  # frozen at termination, never revised

    def record(self, ber: float) -> None:
        if not 0.0 <= ber <= 1.0:
            raise DomainError(f"BER {ber} outside [0, 1]")
        self.ber_history.append(float(ber))

    @property
    def attempts(self) -> int:
        return len(self.ber_history)

    @property
    def avg_ber(self) -> float:
        return average_ber(self.ber_history)

    def terminate(self, cost: float) -> None:
        if self.consumed_loss is not None:
            raise StateError(f"packet {self.packet_id} terminated twice")
        self.consumed_loss = float(cost)


def average_ber(history: Sequence[float]) -> float:
    """Arithmetic mean of a non-empty BER history."""
    if len(history) == 0:
        raise DomainError("BER history is empty")
    return float(np.mean(history))


def packet_loss(s_j: float, avg_ber: float, n: int) -> float:
    """Loss charged for a packet terminated at average BER avg_ber."""
    if s_j < 0:
        raise DomainError("packet sensitivity must be non-negative")
    return loss_scale(n) * s_j * avg_ber


def predicted_model_loss(packets: Sequence, n: int) -> float:
    """Model-level expected loss for (sensitivity, BER) pairs."""
    total = 0.0
    for s_j, p_j in packets:
        if s_j < 0:
            raise DomainError("packet sensitivity must be non-negative")
        if not 0.0 <= p_j <= 1.0:
            raise DomainError(f"BER {p_j} outside [0, 1]")
        total += s_j * p_j
    return loss_scale(n) * total


def combine_receptions(copies: Sequence[np.ndarray]) -> np.ndarray:
    """Element-wise mean of decoded copies; the variance shrinks as 1/T."""
    if len(copies) == 0:
        raise DomainError("no copies to combine")
    arrays = [np.asarray(c, dtype=np.float64) for c in copies]
    shape = arrays[0].shape
    if any(a.shape != shape for a in arrays):
        raise DomainError("received copies disagree in shape")
    return np.mean(arrays, axis=0)


def realized_model_loss(table: SensitivityTable, original: np.ndarray,
                        assembled: np.ndarray) -> float:
    """Quadratic loss 0.5 * sum_d H_dd * (assembled_d - original_d)^2."""
    original = np.asarray(original, dtype=np.float64)
    assembled = np.asarray(assembled, dtype=np.float64)
    if original.shape != (table.dimension,) or assembled.shape != (table.dimension,):
        raise DomainError("parameter vectors must match the table dimension")
    delta = assembled - original
    return float(0.5 * np.sum(table.values * delta * delta))
