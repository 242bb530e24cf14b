"""Bit combinatorics and the geometry of the dyadic group.

The dyadic group is the product of countably many copies of Z_2 with
coordinatewise mod-2 addition.  At resolution M an element is truncated to
its first M coordinates, which we pack into a cell index ``b`` with
coordinate ``x_k`` stored in bit ``k``.  Group addition is then index XOR.

On the integer side, an index n carries three combinatorial statistics used
throughout the kernel estimates: its order (position of the top set bit),
its binary variation, and its decomposition into maximal runs of set bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

MAX_INDEX_BITS = 64


def _check_index(n: int) -> None:
    if n < 0:
        raise ValueError(f"index must be nonnegative, got {n}")
    if n.bit_length() > MAX_INDEX_BITS:
        raise ValueError(f"index exceeds {MAX_INDEX_BITS}-bit cap: {n}")


def bit_order(n: int) -> int:
    """Position of the highest set bit, so 2**bit_order(n) <= n < 2**(bit_order(n)+1)."""
    _check_index(n)
    if n == 0:
        raise ValueError("order of 0 is undefined (empty expansion)")
    return n.bit_length() - 1


def variation(n: int) -> int:
    """Binary variation: bit 0 plus the number of adjacent-bit changes.

    Equals the number of positions where ``n`` and ``2*n`` disagree; the
    shifted-in zero below bit 0 and the zero above the top bit both count,
    so every run of ones contributes exactly two.
    """
    _check_index(n)
    return (n ^ (n << 1)).bit_count()


def block_count(n: int) -> int:
    """Number of maximal runs of set bits in the expansion of ``n``."""
    _check_index(n)
    return (n & ~(n << 1)).bit_count()


@dataclass(frozen=True)
class BitIndex:
    """A positive integer with its binary expansion and statistics."""

    n: int
    bits: tuple[int, ...]
    order: int
    var: int

    @classmethod
    def of(cls, n: int) -> "BitIndex":
        order = bit_order(n)
        bits = tuple((n >> k) & 1 for k in range(order + 1))
        return cls(n=n, bits=bits, order=order, var=variation(n))


@dataclass(frozen=True)
class BlockDecomposition:
    """Maximal runs of set bits, as (low, high) bit positions in increasing order.

    Consecutive runs are separated by at least one zero bit, so
    ``blocks[i][1] <= blocks[i+1][0] - 2``.
    """

    n: int
    blocks: tuple[tuple[int, int], ...]

    @property
    def count(self) -> int:
        return len(self.blocks)

    def reconstruct(self) -> int:
        total = 0
        for lo, hi in self.blocks:
            total += (1 << (hi + 1)) - (1 << lo)
        return total


def block_decomposition(n: int) -> BlockDecomposition:
    """Split ``n`` into maximal runs of consecutive set bits."""
    _check_index(n)
    if n == 0:
        raise ValueError("0 has no block decomposition")
    blocks: list[tuple[int, int]] = []
    rest = n
    while rest:
        low = (rest & -rest).bit_length() - 1
        tail = rest >> low
        width = ((tail + 1) & -(tail + 1)).bit_length() - 1  # trailing run of ones
        blocks.append((low, low + width - 1))
        rest &= ~((1 << (low + width)) - 1)
    return BlockDecomposition(n=n, blocks=tuple(blocks))


def prefix_part(n: int, i: int) -> int:
    """Sum of the ``i-1`` lowest set bits of ``n`` (indexing set bits from 1)."""
    _check_index(n)
    if n < 1:
        raise ValueError("prefix part needs n >= 1")
    s = n.bit_count()
    if not 2 <= i <= s:
        raise ValueError(f"prefix index {i} out of range [2, {s}] for n={n}")
    total = 0
    m = n
    for _ in range(i - 1):
        low = m & -m
        total += low
        m ^= low
    return total


def is_probe_index(n: int) -> bool:
    """Whether bits 0 and 2 are set and bit 1 is clear (n = 5 mod 8).

    These indices make the shifted Fejér kernel bounded below on the probe
    cell I_2(e_0 + e_1); any higher bits are unconstrained.
    """
    _check_index(n)
    if n < 1:
        raise ValueError("probe membership needs n >= 1")
    return n % 8 == 5


@dataclass(frozen=True)
class DyadicPoint:
    """A truncated group element: the first ``resolution`` coordinates.

    Coordinate ``x_k`` is bit ``k`` of ``index``; the point stands for the
    cell of all group elements sharing those coordinates.
    """

    resolution: int
    index: int

    def __post_init__(self) -> None:
        if self.resolution < 0:
            raise ValueError("resolution must be nonnegative")
        if not 0 <= self.index < (1 << self.resolution):
            raise ValueError(
                f"cell index {self.index} out of range at resolution {self.resolution}"
            )

    @classmethod
    def zero(cls, resolution: int) -> "DyadicPoint":
        return cls(resolution, 0)

    @classmethod
    def unit(cls, k: int, resolution: int) -> "DyadicPoint":
        """The point e_k with a single 1 at coordinate k < resolution."""
        if not 0 <= k < resolution:
            raise ValueError(f"unit coordinate {k} needs resolution > {k}")
        return cls(resolution, 1 << k)

    @classmethod
    def from_coords(cls, coords: "tuple[int, ...] | list[int]") -> "DyadicPoint":
        index = 0
        for k, c in enumerate(coords):
            if c not in (0, 1):
                raise ValueError("coordinates must be 0/1")
            index |= c << k
        return cls(len(coords), index)

    @property
    def coords(self) -> tuple[int, ...]:
        return tuple((self.index >> k) & 1 for k in range(self.resolution))

    def coord(self, k: int) -> int:
        """Coordinate x_k, with the implicit zero tail beyond the resolution."""
        if k < 0:
            raise ValueError("coordinate position must be nonnegative")
        if k >= self.resolution:
            return 0
        return (self.index >> k) & 1

    def refine(self, resolution: int) -> "DyadicPoint":
        if resolution < self.resolution:
            raise ValueError("cannot lower the resolution of a point")
        return DyadicPoint(resolution, self.index)

    def __add__(self, other: "DyadicPoint") -> "DyadicPoint":
        res = max(self.resolution, other.resolution)
        return DyadicPoint(res, self.index ^ other.index)

    @property
    def cell_measure(self) -> Fraction:
        return Fraction(1, 1 << self.resolution)


@dataclass(frozen=True)
class DyadicInterval:
    """The interval I_depth(anchor): agreement with the anchor on coordinates 0..depth-1."""

    depth: int
    anchor_index: int

    def __post_init__(self) -> None:
        if self.depth < 0:
            raise ValueError("depth must be nonnegative")
        if not 0 <= self.anchor_index < (1 << self.depth):
            raise ValueError("anchor has bits beyond the interval depth")

    @classmethod
    def around(cls, point: DyadicPoint, depth: int) -> "DyadicInterval":
        if depth > point.resolution:
            raise ValueError("interval depth exceeds the anchor's resolution")
        return cls(depth, point.index & ((1 << depth) - 1))

    @property
    def measure(self) -> Fraction:
        return Fraction(1, 1 << self.depth)

    def contains(self, point: DyadicPoint) -> bool:
        if point.resolution < self.depth:
            raise ValueError("point resolution too coarse for membership test")
        return (point.index & ((1 << self.depth) - 1)) == self.anchor_index

    def cell_indices(self, resolution: int) -> range:
        """Indices of the resolution-``resolution`` cells making up the interval."""
        if resolution < self.depth:
            raise ValueError("resolution coarser than the interval depth")
        step = 1 << self.depth
        return range(self.anchor_index, 1 << resolution, step)


def zero_interval(depth: int) -> DyadicInterval:
    """I_depth(0), the depth-``depth`` interval around the identity."""
    return DyadicInterval(depth, 0)


def probe_cell() -> DyadicInterval:
    """I_2(e_0 + e_1): the cell where both low coordinates equal 1."""
    return DyadicInterval(2, 0b11)


def complement_partition(M: int) -> list[DyadicInterval]:
    """Disjoint dyadic intervals whose union is the complement of I_M.

    The list holds I_{l+1}(e_k + e_l) for 0 <= k < l <= M-1 followed by
    I_M(e_k) for 0 <= k < M, giving M(M-1)/2 + M pieces.
    """
    if M < 1:
        raise ValueError("complement of I_0 is empty; need M >= 1")
    pieces = [
        DyadicInterval(l + 1, (1 << k) | (1 << l))
        for k in range(M - 1)
        for l in range(k + 1, M)
    ]
    pieces.extend(DyadicInterval(M, 1 << k) for k in range(M))
    return pieces


def classify_off_cell(index: int, M: int) -> tuple[int, int] | int:
    """Locate a nonzero low-M bit pattern inside the complement partition.

    Returns ``(k, l)`` for membership in I_{l+1}(e_k + e_l) (k, l the two
    lowest set bits) or the single position ``k`` for I_M(e_k).
    """
    low = index & ((1 << M) - 1)
    if low == 0:
        raise ValueError("cell lies inside I_M, not its complement")
    k = (low & -low).bit_length() - 1
    rest = low ^ (1 << k)
    if rest == 0:
        return k
    l = (rest & -rest).bit_length() - 1
    return (k, l)
