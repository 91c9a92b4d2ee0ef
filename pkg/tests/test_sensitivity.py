"""Sensitivity table loading, synthesis, statistics, pruning, packetization."""

import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pasarsim import sensitivity as sx
from pasarsim.channel import McsConfig, mcs_for_packet_bits
from pasarsim.errors import ConfigError, DomainError, FormatError


def _psns_bytes(values, quant_bits=8, version=1, declared=None):
    values = np.asarray(values, dtype="<f8")
    d = len(values) if declared is None else declared
    return (struct.pack("<4sHHQ", b"PSNS", version, quant_bits, d)
            + values.tobytes())


class TestPsnsFormat:
    def test_writer_reader_round_trip(self, tmp_path):
        table = sx.SensitivityTable(np.array([0.5, 0.0, 1.25]), "toy", 8)
        path = tmp_path / "toy.psns"
        sx.write_psns(table, path)
        loaded = sx.load_table(path)
        assert loaded.dimension == 3
        assert loaded.quant_bits == 8
        assert np.array_equal(loaded.values, table.values)

    def test_golden_bytes(self, tmp_path):
        # Layout is pinned: magic, u16 version=1, u16 bits, u64 D, LE doubles.
        path = tmp_path / "golden.psns"
        sx.write_psns(sx.SensitivityTable(np.array([1.0]), "g", 4), path)
        assert path.read_bytes() == _psns_bytes([1.0], quant_bits=4)

    def test_negative_entry_rejected(self, tmp_path):
        path = tmp_path / "neg.psns"
        path.write_bytes(_psns_bytes([0.5, -0.1]))
        with pytest.raises(DomainError):
            sx.load_table(path)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.psns"
        path.write_bytes(b"XSNS" + _psns_bytes([1.0])[4:])
        with pytest.raises(FormatError):
            sx.load_table(path)

    def test_bad_version(self, tmp_path):
        path = tmp_path / "bad.psns"
        path.write_bytes(_psns_bytes([1.0], version=2))
        with pytest.raises(FormatError):
            sx.load_table(path)

    def test_length_mismatch(self, tmp_path):
        path = tmp_path / "short.psns"
        path.write_bytes(_psns_bytes([1.0, 2.0], declared=3))
        with pytest.raises(FormatError):
            sx.load_table(path)

    def test_truncated_header(self, tmp_path):
        path = tmp_path / "trunc.psns"
        path.write_bytes(b"PSNS\x01")
        with pytest.raises(FormatError):
            sx.load_table(path)


class TestCsvFormat:
    def test_round_trip(self, tmp_path):
        table = sx.SensitivityTable(np.linspace(0, 3, 100), "csvtoy")
        path = tmp_path / "toy.csv"
        sx.write_csv(table, path)
        loaded = sx.load_table(path)
        assert loaded.dimension == 100
        assert np.allclose(loaded.values, table.values, rtol=0, atol=0)

    def test_header_required(self, tmp_path):
        path = tmp_path / "noheader.csv"
        path.write_text("0,1.0\n1,2.0\n")
        with pytest.raises(FormatError):
            sx.load_table(path)

    def test_indices_must_ascend(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("index,sensitivity\n0,1.0\n2,2.0\n")
        with pytest.raises(FormatError):
            sx.load_table(path)

    def test_negative_rejected(self, tmp_path):
        path = tmp_path / "neg.csv"
        path.write_text("index,sensitivity\n0,-1.0\n")
        with pytest.raises(DomainError):
            sx.load_table(path)


class TestSynthesize:
    def test_constant(self):
        table = sx.synthesize_table(10, sx.Constant(1.0), seed=0)
        assert np.array_equal(table.values, np.ones(10))
        assert sx.stats(table).skewness == 0.0

    def test_deterministic(self):
        a = sx.synthesize_table(1000, sx.Lognormal(0, 1.2), seed=5)
        b = sx.synthesize_table(1000, sx.Lognormal(0, 1.2), seed=5)
        assert np.array_equal(a.values, b.values)

    def test_non_negative(self):
        table = sx.synthesize_table(10_000, sx.Lognormal(0, 2.0), seed=1)
        assert table.values.min() >= 0.0

    @pytest.mark.parametrize("dist", [sx.Lognormal(0, 0.0), sx.Exponential(0.0),
                                      sx.Constant(-1.0)])
    def test_invalid_parameters(self, dist):
        with pytest.raises(DomainError):
            sx.synthesize_table(10, dist, seed=0)

    def test_d_must_be_positive(self):
        with pytest.raises(DomainError):
            sx.synthesize_table(0, sx.Constant(1.0), seed=0)

    def test_exponential_skewness_converges_to_two(self):
        # Closed form: the skewness of any exponential is exactly 2.
        table = sx.synthesize_table(1_000_000, sx.Exponential(1.0), seed=11)
        assert sx.stats(table).skewness == pytest.approx(2.0, abs=0.1)

    def test_exponential_skewness_scale_invariant(self):
        for rate in (0.25, 4.0):
            table = sx.synthesize_table(400_000, sx.Exponential(rate), seed=3)
            assert sx.stats(table).skewness == pytest.approx(2.0, abs=0.15)

    def test_default_distribution_is_highly_right_skewed(self):
        table = sx.synthesize_table(1_000_000, sx.DEFAULT_DISTRIBUTION, seed=2)
        assert sx.stats(table).skewness > 1.0

    def test_parse_distribution(self):
        assert sx.parse_distribution({"kind": "lognormal", "sigma": 0.7}) == \
            sx.Lognormal(0.0, 0.7)
        assert sx.parse_distribution({"kind": "exponential", "rate": 2.0}) == \
            sx.Exponential(2.0)
        with pytest.raises(ConfigError):
            sx.parse_distribution({"kind": "pareto"})


class TestStats:
    def test_constant_zero_variance_convention(self):
        summary = sx.stats(sx.SensitivityTable(np.array([1.0, 1.0, 1.0])))
        assert summary.variance == 0.0
        assert summary.skewness == 0.0
        assert summary.zero_variance

    def test_three_point_hand_oracle(self):
        # [0, 0, 3]: mean 1, m2 = 2, m3 = (−1−1+8)/3 = 2, skew = 2/2^1.5
        summary = sx.stats(sx.SensitivityTable(np.array([0.0, 0.0, 3.0])))
        assert summary.mean == pytest.approx(1.0)
        assert summary.median == pytest.approx(0.0)
        assert summary.variance == pytest.approx(2.0)
        assert summary.skewness == pytest.approx(2.0 / 2.0**1.5)
        assert not summary.zero_variance


class TestPrune:
    def test_half_of_four(self):
        table = sx.SensitivityTable(np.array([5.0, 1.0, 3.0, 2.0]))
        assert np.array_equal(sx.prune(table, 0.5).values, [5.0, 3.0])

    def test_rate_zero_identity(self):
        table = sx.SensitivityTable(np.array([5.0, 1.0, 3.0]))
        assert np.array_equal(sx.prune(table, 0.0).values, table.values)

    def test_tie_break_drops_lower_indices_first(self):
        table = sx.SensitivityTable(np.array([2.0, 2.0, 2.0, 2.0]))
        pruned = sx.prune(table, 0.5)
        assert pruned.dimension == 2  # survivors are the last two entries

    def test_rate_bounds(self):
        table = sx.SensitivityTable(np.array([1.0]))
        for rate in (-0.1, 1.0, 1.5):
            with pytest.raises(DomainError):
                sx.prune(table, rate)

    def test_survivors_dominate_order_statistic(self):
        rng = np.random.default_rng(4)
        values = rng.lognormal(0, 1.0, size=400)
        table = sx.SensitivityTable(values)
        k = int(0.3 * 400)
        pruned = sx.prune(table, 0.3)
        cutoff = np.sort(values)[k - 1]
        assert pruned.dimension == 400 - k
        assert pruned.values.min() >= cutoff

    def test_pruning_reduces_skewness_of_lognormal(self):
        table = sx.synthesize_table(200_000, sx.Lognormal(0, 1.2), seed=9)
        before = sx.stats(table).skewness
        after = sx.stats(sx.prune(table, 0.2)).skewness
        assert after < before


class TestPacketize:
    def test_two_full_packets(self):
        table = sx.SensitivityTable(np.ones(250))
        packets = sx.packetize(table, mcs_for_packet_bits(1000, quant_bits=8))
        assert [p.size for p in packets] == [125, 125]

    def test_singleton(self):
        table = sx.SensitivityTable(np.array([4.2]))
        packets = sx.packetize(table, McsConfig())
        assert len(packets) == 1
        assert packets[0].sensitivity == pytest.approx(4.2)

    def test_ragged_tail_sums(self):
        rng = np.random.default_rng(12)
        values = rng.exponential(size=300)
        table = sx.SensitivityTable(values)
        packets = sx.packetize(table, mcs_for_packet_bits(1000, quant_bits=8))
        assert [p.size for p in packets] == [125, 125, 50]
        for p in packets:
            start, stop = p.param_range
            assert p.sensitivity == pytest.approx(values[start:stop].sum(),
                                                  rel=1e-12)

    def test_zero_capacity_rejected(self):
        with pytest.raises(ConfigError):
            McsConfig(symbols_per_packet=1, quant_bits=8)  # 1 info bit < 8

    @given(st.integers(1, 600), st.integers(1, 40))
    @settings(max_examples=80, deadline=None)
    def test_partition_property(self, d, capacity):
        # Ranges must tile [0, D) in order with no overlap.
        mcs = McsConfig(modulation_order=4, code_rate=1.0,
                        symbols_per_packet=capacity, quant_bits=2)
        assert mcs.k_capacity == capacity
        table = sx.SensitivityTable(np.arange(d, dtype=float) + 0.5, quant_bits=2)
        packets = sx.packetize(table, mcs)
        cursor = 0
        for j, p in enumerate(packets):
            assert p.packet_id == j
            assert p.param_range[0] == cursor
            cursor = p.param_range[1]
            assert p.size <= capacity
        assert cursor == d
        assert len(packets) == -(-d // capacity)

    def test_total_sensitivity_preserved(self):
        rng = np.random.default_rng(13)
        values = rng.lognormal(0, 1.5, size=5000)
        table = sx.SensitivityTable(values)
        packets = sx.packetize(table, mcs_for_packet_bits(504, quant_bits=8))
        assert sum(p.sensitivity for p in packets) == pytest.approx(
            values.sum(), rel=1e-9)


class TestTableInvariants:
    def test_negative_values_rejected(self):
        with pytest.raises(DomainError):
            sx.SensitivityTable(np.array([1.0, -0.5]))

    def test_empty_rejected(self):
        with pytest.raises(DomainError):
            sx.SensitivityTable(np.array([]))

    def test_values_frozen(self):
        table = sx.SensitivityTable(np.array([1.0, 2.0]))
        with pytest.raises(ValueError):
            table.values[0] = 9.0
