"""Bit combinatorics and dyadic geometry."""

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from walshfejer.dyadic import (
    BitIndex,
    DyadicInterval,
    DyadicPoint,
    bit_order,
    block_count,
    block_decomposition,
    classify_off_cell,
    complement_partition,
    is_probe_index,
    prefix_part,
    probe_cell,
    variation,
    zero_interval,
)


def variation_by_formula(n: int) -> int:
    bits = [(n >> k) & 1 for k in range(n.bit_length() + 2)]
    if not bits:
        return 0
    return bits[0] + sum(abs(bits[k] - bits[k - 1]) for k in range(1, len(bits)))


class TestVariation:
    def test_examples(self):
        assert variation(0) == 0
        assert variation(2) == 2
        assert variation(5) == 4

    def test_matches_direct_formula_exhaustively(self):
        for n in range(0, 1 << 12):
            assert variation(n) == variation_by_formula(n)

    @given(st.integers(min_value=0, max_value=2**60))
    def test_matches_direct_formula(self, n):
        assert variation(n) == variation_by_formula(n)

    def test_powers_and_all_ones(self):
        for k in range(1, 40):
            assert variation(1 << k) == 2
            assert variation((1 << k) - 1) == 2

    def test_rejects_oversized(self):
        with pytest.raises(ValueError):
            variation(1 << 65)


class TestBlockDecomposition:
    def test_examples(self):
        assert block_decomposition(1).blocks == ((0, 0),)
        assert block_decomposition(5).blocks == ((0, 0), (2, 2))
        assert block_decomposition(152).blocks == ((3, 4), (7, 7))

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            block_decomposition(0)

    def test_invariants_exhaustive_to_2_16(self):
        for n in range(1, (1 << 16) + 1):
            d = block_decomposition(n)
            assert d.reconstruct() == n
            s = d.count
            assert s <= variation(n) <= 2 * s + 1
            for (_, hi), (lo2, _) in zip(d.blocks, d.blocks[1:]):
                assert hi <= lo2 - 2

    @given(st.integers(min_value=1, max_value=2**63))
    def test_reconstruction(self, n):
        d = block_decomposition(n)
        assert d.reconstruct() == n
        assert d.count == block_count(n)


class TestBitIndex:
    def test_fields(self):
        b = BitIndex.of(152)
        assert b.order == 7 and b.var == 4
        assert b.bits == (0, 0, 0, 1, 1, 0, 0, 1)

    @given(st.integers(min_value=1, max_value=2**50))
    def test_order_brackets(self, n):
        order = bit_order(n)
        assert (1 << order) <= n < (1 << (order + 1))


class TestPrefixPart:
    def test_examples(self):
        assert prefix_part(5, 2) == 1
        assert prefix_part(7, 3) == 3

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            prefix_part(2, 2)
        with pytest.raises(ValueError):
            prefix_part(7, 4)

    @given(st.integers(min_value=3, max_value=2**40))
    def test_sums_lowest_bits(self, n):
        s = n.bit_count()
        if s < 2:
            return
        positions = [k for k in range(n.bit_length()) if (n >> k) & 1]
        for i in range(2, s + 1):
            assert prefix_part(n, i) == sum(1 << k for k in positions[: i - 1])


class TestProbeIndices:
    def test_examples(self):
        assert is_probe_index(5)
        assert is_probe_index(13)
        assert not is_probe_index(7)

    def test_bit_characterization(self):
        for n in range(1, 4096):
            expected = bool(n & 1) and not (n & 2) and bool(n & 4)
            assert is_probe_index(n) == expected


class TestGeometry:
    def test_unit_point(self):
        e1 = DyadicPoint.unit(1, 3)
        assert e1.coords == (0, 1, 0)
        assert e1.cell_measure == Fraction(1, 8)
        with pytest.raises(ValueError):
            DyadicPoint.unit(3, 3)

    def test_group_addition_is_xor(self):
        p = DyadicPoint.unit(0, 4) + DyadicPoint.unit(2, 4)
        assert p.index == 0b101
        assert (p + p).index == 0

    def test_interval_membership(self):
        iv = DyadicInterval(2, 0b11)
        assert iv.measure == Fraction(1, 4)
        assert iv.contains(DyadicPoint(4, 0b1011))
        assert not iv.contains(DyadicPoint(4, 0b1001))
        assert list(iv.cell_indices(3)) == [3, 7]

    def test_probe_cell(self):
        assert probe_cell() == DyadicInterval(2, 3)


class TestComplementPartition:
    def test_small_instances(self):
        assert complement_partition(1) == [DyadicInterval(1, 1)]
        assert complement_partition(2) == [
            DyadicInterval(2, 0b11),
            DyadicInterval(2, 0b01),
            DyadicInterval(2, 0b10),
        ]

    def test_measures_sum_to_complement(self):
        for M in range(1, 9):
            total = sum(iv.measure for iv in complement_partition(M))
            assert total == 1 - Fraction(1, 1 << M)

    def test_exact_cover_cell_by_cell(self):
        for M in range(1, 11):
            pieces = complement_partition(M)
            assert len(pieces) == M * (M - 1) // 2 + M
            resolution = M + 1
            for b in range(1 << resolution):
                hits = sum(
                    1
                    for iv in pieces
                    if (b & ((1 << iv.depth) - 1)) == iv.anchor_index
                )
                inside = (b & ((1 << M) - 1)) == 0
                assert hits == (0 if inside else 1)

    def test_rejects_zero_depth(self):
        with pytest.raises(ValueError):
            complement_partition(0)

    def test_classifier_agrees_with_partition(self):
        M = 5
        for b in range(1, 1 << M):
            where = classify_off_cell(b, M)
            if isinstance(where, tuple):
                k, l = where
                assert (b & ((1 << (l + 1)) - 1)) == (1 << k) | (1 << l)
            else:
                assert b == (1 << where)
        with pytest.raises(ValueError):
            classify_off_cell(0b100000, 5)

    def test_zero_interval(self):
        assert zero_interval(3) == DyadicInterval(3, 0)
