"""n-bit signed integer codec and the independent bit-flip distortion model.

Parameters are coded as n-bit signed words, value = sum(b_i * 2^i) - b_{n-1} * 2^{n-1}
with bit 0 least significant.  Channel errors flip each bit independently with
probability P_b; closed forms for the distortion variance and the quadratic-loss
scale constant live here alongside the samplers.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

MIN_WIDTH = 2
MAX_WIDTH = 32  # (delta w)^2 up to 4^32 must stay inside float64/int64 headroom


def _check_width(n: int) -> None:
    if not MIN_WIDTH <= n <= MAX_WIDTH:
        raise DomainError(f"bit width must be in [{MIN_WIDTH}, {MAX_WIDTH}], got {n}")


@dataclass(frozen=True)
class QuantParam:
    """An n-bit signed word, stored bit 0 first."""

    bits: tuple
    width: int

    @property
    def value(self) -> int:
        body = sum(b << i for i, b in enumerate(self.bits[:-1]))
        return body - (self.bits[-1] << (self.width - 1))


@dataclass(frozen=True)
class FlipMask:
    """Per-bit flip indicators, same layout as QuantParam.bits."""

    flips: tuple

    @property
    def width(self) -> int:
        return len(self.flips)


def encode(value: int, n: int) -> QuantParam:
    """Encode an integer into its n-bit signed representation."""
    _check_width(n)
    lo, hi = -(1 << (n - 1)), (1 << (n - 1)) - 1
    if not lo <= value <= hi:
        raise DomainError(f"value {value} not representable in {n} signed bits")
    word = value & ((1 << n) - 1)  # two's complement word
    return QuantParam(bits=tuple((word >> i) & 1 for i in range(n)), width=n)


def decode(param: QuantParam) -> int:
    return param.value


def apply_flips(param: QuantParam, mask: FlipMask) -> int:
    """Distorted integer after applying a flip mask to a coded word.

    Each flipped bit moves the word by +/- 2^i depending on the original bit,
    the sign bit by -/+ 2^{n-1}.
    """
    if mask.width != param.width:
        raise DomainError(
            f"flip mask width {mask.width} does not match word width {param.width}"
        )
    n = param.width
    b, a = param.bits, mask.flips
    body = sum((a[i] * (-1) ** b[i] + b[i]) << i for i in range(n - 1))
    return body - ((a[n - 1] * (-1) ** b[n - 1] + b[n - 1]) << (n - 1))


def sample_flips(n: int, p_b: float, rng: np.random.Generator) -> FlipMask:
    """Draw one flip mask with i.i.d. Bernoulli(p_b) indicators."""
    _check_width(n)
    if not 0.0 <= p_b <= 1.0:
        raise DomainError(f"flip probability must be in [0, 1], got {p_b}")
    return FlipMask(flips=tuple(int(u < p_b) for u in rng.random(n)))


def distortion_variance(n: int, p_b: float, exact: bool = True) -> float:
    """Variance of the decode error under Bernoulli(p_b) bit flips.

    exact=True gives p(1-p)(4^n - 1)/3; exact=False drops the (1-p) factor,
    the small-p_b form.
    """
    _check_width(n)
    if not 0.0 <= p_b <= 1.0:
        raise DomainError(f"flip probability must be in [0, 1], got {p_b}")
    base = (4**n - 1) / 3.0
    return p_b * (1.0 - p_b) * base if exact else p_b * base


def loss_scale(n: int) -> float:
    """Quadratic-loss constant (4^n - 1)/6 for n-bit words."""
    _check_width(n)
    return (4**n - 1) / 6.0


# ---------------------------------------------------------------------------
# Vectorized helpers for Monte Carlo paths (same codec, array-at-a-time).
# ---------------------------------------------------------------------------


def encode_words(values: np.ndarray, n: int) -> np.ndarray:
    """Two's-complement words (uint64) for an array of representable ints."""
    _check_width(n)
    values = np.asarray(values, dtype=np.int64)
    lo, hi = -(1 << (n - 1)), (1 << (n - 1)) - 1
    if values.size and (values.min() < lo or values.max() > hi):
        raise DomainError(f"values outside the {n}-bit signed range")
    return (values & ((1 << n) - 1)).astype(np.uint64)


def decode_words(words: np.ndarray, n: int) -> np.ndarray:
    """Signed values (int64) for an array of n-bit words."""
    _check_width(n)
    words = np.asarray(words, dtype=np.uint64)
    values = words.astype(np.int64)
    sign = (words >> np.uint64(n - 1)).astype(np.int64)
    return values - (sign << n)

def sample_flip_words(shape, n: int, p_b, rng: np.random.Generator,
                      dtype=np.float64) -> np.ndarray:
    """Flip masks packed as uint64 words; p_b broadcasts over the first axis."""
    _check_width(n)
    p = np.asarray(p_b, dtype=np.float64)
    if p.ndim > 0:
        p = p.reshape(p.shape + (1,) * (len(tuple(shape)) + 1 - p.ndim))
    u = rng.random(tuple(shape) + (n,), dtype=dtype)
    weights = (np.uint64(1) << np.arange(n, dtype=np.uint64))
    return ((u < p).astype(np.uint64) * weights).sum(axis=-1, dtype=np.uint64)


def flip_and_decode(words: np.ndarray, masks: np.ndarray, n: int) -> np.ndarray:
    """Decode words after XOR-ing in flip masks."""
    return decode_words(np.bitwise_xor(words, masks), n)
