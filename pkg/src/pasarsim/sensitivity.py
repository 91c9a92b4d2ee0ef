"""Per-parameter sensitivity tables and their packetization.

A table holds one non-negative sensitivity per model parameter (curvature of
the validation loss with respect to that parameter, evaluated offline).  Tables
can be loaded from the PSNS binary format or the CSV interop format, synthesized
from simple distributions for desk-scale studies, pruned, summarized, and cut
into contiguous packets sized by the link's per-packet parameter capacity.

PSNS binary layout (little endian): magic b"PSNS", version u16 = 1,
quant_bits u16, D u64, then D float64 sensitivities.
"""

import csv
import io
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import ConfigError, DomainError, FormatError

PSNS_MAGIC = b"PSNS"
PSNS_VERSION = 1
_HEADER = struct.Struct("<4sHHQ")


@dataclass(frozen=True)
class SensitivityTable:
    """Non-negative sensitivities for a D-dimensional model."""

    values: np.ndarray
    model_name: str = "unnamed"
    quant_bits: int = 8

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size < 1:
            raise DomainError("sensitivity table must be a non-empty 1-D vector")
        if not np.all(np.isfinite(values)):
            raise DomainError("sensitivity table contains non-finite entries")
        if values.min() < 0.0:
            raise DomainError("sensitivities must be non-negative")

    @property
    def dimension(self) -> int:
        return int(self.values.size)

    def scaled(self, factor: float) -> "SensitivityTable":
        if factor < 0:
            raise DomainError("scale factor must be non-negative")
        return SensitivityTable(self.values * factor, self.model_name, self.quant_bits)


@dataclass(frozen=True)
class SensitivityStats:
    """Population moments of a table; skewness is the third standardized moment."""

    mean: float
    median: float
    variance: float
    skewness: float
    zero_variance: bool = False


@dataclass(frozen=True)
class PacketSpec:
    """A contiguous parameter slice and its cumulative sensitivity."""

    packet_id: int
    param_range: tuple  # half-open (start, stop)
    sensitivity: float

    @property
    def size(self) -> int:
        return self.param_range[1] - self.param_range[0]


# ---------------------------------------------------------------------------
# Distribution specs for synthetic tables.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Lognormal:
    mu: float = 0.0
    sigma: float = 1.2


@dataclass(frozen=True)
class Exponential:
    rate: float = 1.0


@dataclass(frozen=True)
class Constant:
    value: float = 1.0


Distribution = Union[Lognormal, Exponential, Constant]

#: Desk-scale stand-in for trained-model curvature tables: right-skewed enough
#: that per-parameter skewness sits well above 1.
DEFAULT_DISTRIBUTION = Lognormal(mu=0.0, sigma=1.2)


def parse_distribution(spec: dict) -> Distribution:
    """Build a distribution from a config mapping like {"kind": "lognormal", ...}."""
    kind = str(spec.get("kind", "")).lower()
    if kind == "lognormal":
        return Lognormal(float(spec.get("mu", 0.0)), float(spec.get("sigma", 1.2)))
    if kind == "exponential":
        return Exponential(float(spec.get("rate", 1.0)))
    if kind == "constant":
        return Constant(float(spec.get("value", 1.0)))
    raise ConfigError(f"unknown distribution kind {spec.get('kind')!r}")


def synthesize_table(d: int, distribution: Distribution, seed: int,
                     quant_bits: int = 8, model_name: str = "synthetic") -> SensitivityTable:
    """Draw a deterministic table of d i.i.d. sensitivities."""
    if d < 1:
        raise DomainError(f"table dimension must be >= 1, got {d}")
    rng = np.random.default_rng(seed)
    if isinstance(distribution, Lognormal):
        if distribution.sigma <= 0:
            raise DomainError("lognormal sigma must be > 0")
        values = rng.lognormal(mean=distribution.mu, sigma=distribution.sigma, size=d)
    elif isinstance(distribution, Exponential):
        if distribution.rate <= 0:
            raise DomainError("exponential rate must be > 0")
        values = rng.exponential(scale=1.0 / distribution.rate, size=d)
    elif isinstance(distribution, Constant):
        if distribution.value < 0:
            raise DomainError("constant sensitivity must be >= 0")
        values = np.full(d, float(distribution.value))
    else:
        raise DomainError(f"unsupported distribution {distribution!r}")
    return SensitivityTable(values, model_name=model_name, quant_bits=quant_bits)


# ---------------------------------------------------------------------------
# Serialization.
# ---------------------------------------------------------------------------


def write_psns(table: SensitivityTable, path) -> None:
    """Write a table in the PSNS binary format."""
    payload = table.values.astype("<f8").tobytes()
    header = _HEADER.pack(PSNS_MAGIC, PSNS_VERSION, table.quant_bits, table.dimension)
    Path(path).write_bytes(header + payload)


def write_csv(table: SensitivityTable, path) -> None:
    """Write the CSV interop format: header `index,sensitivity`, ascending rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "sensitivity"])
        for i, v in enumerate(table.values):
            writer.writerow([i, repr(float(v))])


def _load_psns(raw: bytes, name: str) -> SensitivityTable:
    if len(raw) < _HEADER.size:
        raise FormatError("PSNS file shorter than its header")
    magic, version, quant_bits, d = _HEADER.unpack_from(raw)
    if magic != PSNS_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {PSNS_MAGIC!r}")
    if version != PSNS_VERSION:
        raise FormatError(f"unsupported PSNS version {version}")
    if d < 1:
        raise FormatError("PSNS header declares an empty table")
    body = raw[_HEADER.size:]
    if len(body) != 8 * d:
        raise FormatError(
            f"PSNS payload holds {len(body) // 8} values but header declares {d}"
        )
    values = np.frombuffer(body, dtype="<f8").astype(np.float64)
    if np.any(values < 0):
        raise DomainError("PSNS table contains negative sensitivities")
    return SensitivityTable(values, model_name=name, quant_bits=quant_bits)


def _load_csv(text: str, name: str) -> SensitivityTable:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError("empty CSV sensitivity file") from None
    if [c.strip().lower() for c in header[:2]] != ["index", "sensitivity"]:
        raise FormatError("CSV header must be `index,sensitivity`")
    values = []
    for row in reader:
        if not row:
            continue
        if len(row) < 2:
            raise FormatError(f"CSV row {len(values)} is missing a column")
        try:
            idx, val = int(row[0]), float(row[1])
        except ValueError as exc:
            raise FormatError(f"CSV row {len(values)} is not numeric: {row}") from exc
        if idx != len(values):
            raise FormatError(
                f"CSV indices must ascend from 0; row {len(values)} has index {idx}"
            )
        if val < 0:
            raise DomainError(f"negative sensitivity {val} at index {idx}")
        values.append(val)
    if not values:
        raise FormatError("CSV sensitivity file holds no rows")
    return SensitivityTable(np.array(values), model_name=name)


def load_table(path) -> SensitivityTable:
    """Load a table from a PSNS binary file or the CSV interop format."""
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] == PSNS_MAGIC:
        return _load_psns(raw, path.stem)
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path} is neither PSNS nor CSV") from exc
    return _load_csv(text, path.stem)


# ---------------------------------------------------------------------------
# Summaries and transforms.
# ---------------------------------------------------------------------------


def stats(table: SensitivityTable) -> SensitivityStats:
    """Population mean/median/variance and Fisher skewness.

    A constant table has a 0/0 skewness; reported as 0 with zero_variance set.
    """
    x = table.values
    mean = float(x.mean())
    centered = x - mean
    variance = float(np.mean(centered**2))
    if variance == 0.0:
        return SensitivityStats(mean, float(np.median(x)), 0.0, 0.0, True)
    skew = float(np.mean(centered**3) / variance**1.5)
    return SensitivityStats(mean, float(np.median(x)), variance, skew, False)


def prune(table: SensitivityTable, rate: float) -> SensitivityTable:
    """Drop the floor(rate * D) lowest-sensitivity entries, keeping order.

    Ties at the cutoff are dropped in ascending index order so runs reproduce.
    """
    if not 0.0 <= rate < 1.0:
        raise DomainError(f"prune rate must be in [0, 1), got {rate}")
    d = table.dimension
    k = int(rate * d)
    if k == 0:
        return SensitivityTable(table.values.copy(), table.model_name, table.quant_bits)
    drop = np.argsort(table.values, kind="stable")[:k]
    keep = np.ones(d, dtype=bool)
    keep[drop] = False
    return SensitivityTable(table.values[keep], table.model_name, table.quant_bits)


def packetize(table: SensitivityTable, mcs) -> list:
    """Cut the table into index-order packets of at most K_capacity parameters.

    All packets are full except possibly the last; packet sensitivity is the
    sum of the member entries.
    """
    capacity = mcs.k_capacity
    if capacity < 1:
        raise ConfigError("packet capacity is zero; packetization impossible")
    d = table.dimension
    packets = []
    for j, start in enumerate(range(0, d, capacity)):
        stop = min(start + capacity, d)
        packets.append(
            PacketSpec(
                packet_id=j,
                param_range=(start, stop),
                sensitivity=float(table.values[start:stop].sum()),
            )
        )
    return packets


def packet_sensitivities(packets: Sequence[PacketSpec]) -> np.ndarray:
    return np.array([p.sensitivity for p in packets], dtype=np.float64)
