"""Codec and bit-flip distortion model tests."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pasarsim.errors import DomainError
from pasarsim import quantcodec as qc


class TestEncode:
    def test_small_positive(self):
        assert qc.encode(5, 8).bits == (1, 0, 1, 0, 0, 0, 0, 0)

    def test_most_negative_is_sign_bit_only(self):
        assert qc.encode(-128, 8).bits == (0,) * 7 + (1,)

    def test_minus_one_is_all_ones(self):
        assert qc.encode(-1, 8).bits == (1,) * 8

    @pytest.mark.parametrize("value", [-129, 128, 1000])
    def test_out_of_range_rejected(self, value):
        with pytest.raises(DomainError):
            qc.encode(value, 8)

    @pytest.mark.parametrize("n", [1, 0, 33])
    def test_width_bounds(self, n):
        with pytest.raises(DomainError):
            qc.encode(0, n)

    def test_boundary_width_accepted(self):
        assert qc.encode(1, 2).value == 1

    @pytest.mark.parametrize("n", range(2, 9))
    def test_round_trip_exhaustive_small_widths(self, n):
        for v in range(-(1 << (n - 1)), 1 << (n - 1)):
            assert qc.encode(v, n).value == v

    @given(st.integers(min_value=9, max_value=12), st.data())
    @settings(max_examples=60, deadline=None)
    def test_round_trip_sampled_wider(self, n, data):
        v = data.draw(st.integers(-(1 << (n - 1)), (1 << (n - 1)) - 1))
        assert qc.encode(v, n).value == v

    def test_vector_codec_matches_scalar(self):
        rng = np.random.default_rng(0)
        vals = rng.integers(-128, 128, size=512)
        words = qc.encode_words(vals, 8)
        assert np.array_equal(qc.decode_words(words, 8), vals)


class TestApplyFlips:
    def test_flip_low_bit_adds_two(self):
        mask = qc.FlipMask((0, 1, 0, 0, 0, 0, 0, 0))
        assert qc.apply_flips(qc.encode(5, 8), mask) == 7

    def test_flip_sign_bit_of_most_negative(self):
        mask = qc.FlipMask((0,) * 7 + (1,))
        assert qc.apply_flips(qc.encode(-128, 8), mask) == 0

    def test_width_mismatch(self):
        with pytest.raises(DomainError):
            qc.apply_flips(qc.encode(5, 8), qc.FlipMask((1, 0)))

    def test_matches_xor_decode_oracle(self):
        # Independent route: XOR the packed words and decode.
        rng = np.random.default_rng(42)
        for _ in range(2000):
            n = int(rng.integers(2, 13))
            v = int(rng.integers(-(1 << (n - 1)), 1 << (n - 1)))
            mask_bits = tuple(int(b) for b in rng.integers(0, 2, size=n))
            direct = qc.apply_flips(qc.encode(v, n), qc.FlipMask(mask_bits))
            word = qc.encode_words(np.array([v]), n)[0]
            mask_word = np.uint64(sum(b << i for i, b in enumerate(mask_bits)))
            assert direct == qc.decode_words(np.array([word ^ mask_word]), n)[0]

    def test_vectorized_xor_matches_scalar_batch(self):
        rng = np.random.default_rng(7)
        vals = rng.integers(-8, 8, size=10_000)
        words = qc.encode_words(vals, 4)
        masks = qc.sample_flip_words((vals.size,), 4, 0.3, rng)
        fast = qc.flip_and_decode(words, masks, 4)
        slow = qc.decode_words(words ^ masks, 4)
        assert np.array_equal(fast, slow)


class TestSampleFlips:
    def test_p_zero_all_clear(self):
        rng = np.random.default_rng(0)
        assert qc.sample_flips(8, 0.0, rng).flips == (0,) * 8

    def test_p_one_all_set(self):
        rng = np.random.default_rng(0)
        assert qc.sample_flips(8, 1.0, rng).flips == (1,) * 8

    def test_p_out_of_range(self):
        with pytest.raises(DomainError):
            qc.sample_flips(8, 1.5, np.random.default_rng(0))

    def test_deterministic_for_fixed_state(self):
        a = qc.sample_flips(16, 0.4, np.random.default_rng(99))
        b = qc.sample_flips(16, 0.4, np.random.default_rng(99))
        assert a == b

    def test_empirical_rate(self):
        rng = np.random.default_rng(1)
        masks = qc.sample_flip_words((1_000_000,), 8, 0.1, rng)
        bits = np.unpackbits(masks.astype(np.uint8)[:, None], axis=1)
        rate = bits.sum() / (8 * 1_000_000)
        assert rate == pytest.approx(0.1, abs=1e-3)


class TestDistortionStatistics:
    def test_small_p_approximation_value(self):
        assert qc.distortion_variance(8, 0.01, exact=False) == pytest.approx(
            65535 / 3 * 0.01)

    def test_zero_p_is_zero(self):
        assert qc.distortion_variance(8, 0.0, exact=True) == 0.0
        assert qc.distortion_variance(8, 0.0, exact=False) == 0.0

    def test_exact_form(self):
        assert qc.distortion_variance(4, 0.05, exact=True) == pytest.approx(
            0.05 * 0.95 * (4**4 - 1) / 3)

    def test_loss_scale_values(self):
        assert qc.loss_scale(8) == 10922.5
        assert qc.loss_scale(2) == 2.5

    def test_loss_scale_rejects_width_one(self):
        with pytest.raises(DomainError):
            qc.loss_scale(1)

    def test_exact_variance_against_monte_carlo(self):
        # encode -> flip -> decode sampling oracle, n=4, P=0.05, 1e6 trials.
        # The law is the flip-randomness variance, so it conditions on a word.
        rng = np.random.default_rng(2024)
        n, p = 4, 0.05
        value = int(rng.integers(-(1 << (n - 1)), 1 << (n - 1)))
        words = qc.encode_words(np.full(1_000_000, value), n)
        masks = qc.sample_flip_words((words.size,), n, p, rng)
        delta = qc.flip_and_decode(words, masks, n) - value
        assert np.var(delta) == pytest.approx(
            qc.distortion_variance(n, p, exact=True), rel=0.02)

    def test_unconditional_second_moment_drops_the_one_minus_p(self):
        # Over uniform random source words the conditional means average out
        # and E[delta^2] equals p*(4^n - 1)/3 exactly, i.e. the small-p form.
        rng = np.random.default_rng(2025)
        n, p = 4, 0.2
        vals = rng.integers(-(1 << (n - 1)), 1 << (n - 1), size=1_000_000)
        words = qc.encode_words(vals, n)
        masks = qc.sample_flip_words((vals.size,), n, p, rng)
        delta = (qc.flip_and_decode(words, masks, n) - vals).astype(np.float64)
        assert np.mean(delta**2) == pytest.approx(
            qc.distortion_variance(n, p, exact=False), rel=0.02)


class TestDistortionProperties:
    def test_zero_mean_distortion(self):
        # Appendix zero-mean fact: E[delta] = 0 within 3 standard errors.
        rng = np.random.default_rng(5)
        n, p, m = 8, 0.05, 400_000
        vals = rng.integers(-128, 128, size=m)
        words = qc.encode_words(vals, n)
        masks = qc.sample_flip_words((m,), n, p, rng)
        delta = (qc.flip_and_decode(words, masks, n) - vals).astype(np.float64)
        se = delta.std() / np.sqrt(m)
        assert abs(delta.mean()) < 3 * se

    def test_variance_independent_of_source_word(self):
        # Conditioning on a fixed word must not change the variance law.
        rng = np.random.default_rng(6)
        n, p, m = 6, 0.1, 300_000
        expected = qc.distortion_variance(n, p, exact=True)
        for value in (-32, 0, 31):
            words = qc.encode_words(np.full(m, value), n)
            masks = qc.sample_flip_words((m,), n, p, rng)
            delta = qc.flip_and_decode(words, masks, n) - value
            assert np.var(delta) == pytest.approx(expected, rel=0.03)

    def test_bit_positions_uncorrelated(self):
        rng = np.random.default_rng(8)
        m, n, p = 300_000, 8, 0.2
        bits = (rng.random((m, n)) < p).astype(np.float64)
        cov = np.cov(bits.T)
        off_diagonal = cov[~np.eye(n, dtype=bool)]
        assert np.abs(off_diagonal).max() < 5e-3
