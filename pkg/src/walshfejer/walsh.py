"""Walsh-Paley system, fast transform, and summability kernels.

With coordinate x_k stored in bit k of the cell index, the n-th Walsh
function takes the value (-1)**popcount(n & b) on cell b, so the
natural-order fast Walsh-Hadamard butterfly computes exactly the
Walsh-Paley coefficients.  Kernels are materialized at resolution
order(n) + 1 by default, the coarsest grid on which they are constant.

Heavy scans run on int64 arrays (numpy) after an explicit overflow guard;
every such path is cross-checked against the pure-rational transform in
the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dyadic import (
    BlockDecomposition,
    DyadicPoint,
    bit_order,
    block_decomposition,
    classify_off_cell,
)
from .stepfn import StepFunction, _div_pow2, conditional_expectation

_INT64_SAFE = 1 << 62


def _hadamard(values: list) -> list:
    """In-place Walsh-Hadamard butterfly over exact rationals."""
    v = list(values)
    n = len(v)
    h = 1
    while h < n:
        for base in range(0, n, 2 * h):
            for j in range(base, base + h):
                a, b = v[j], v[j + h]
                v[j], v[j + h] = a + b, a - b
        h *= 2
    return v


def _fwht_int(a: np.ndarray) -> np.ndarray:
    """Butterfly on int64 values; exact, guarded against overflow.

    Every intermediate entry is a signed subset sum of the inputs, so
    max|input| * size bounds all values produced.
    """
    a = np.array(a, dtype=np.int64)
    if a.size and int(np.abs(a).max()) * a.size >= _INT64_SAFE:
        raise OverflowError("int64 transform would overflow; use the rational path")
    n = a.size
    h = 1
    while h < n:
        b = a.reshape(-1, 2, h)
        top = b[:, 0, :].copy()
        b[:, 0, :] = top + b[:, 1, :]
        b[:, 1, :] = top - b[:, 1, :]
        h *= 2
    return a


def walsh_signs(index: int, resolution: int) -> np.ndarray:
    """Values of the index-th Walsh function on all cells, as an int64 +/-1 array."""
    if index >= (1 << resolution):
        raise ValueError(f"Walsh index {index} needs resolution > {bit_order(index)}")
    cells = np.arange(1 << resolution, dtype=np.uint64)
    parity = (np.bitwise_count(cells & np.uint64(index)) & 1).astype(np.int64)
    return 1 - 2 * parity


@dataclass(frozen=True)
class WalshSpectrum:
    """The 2**M Walsh-Paley coefficients of a resolution-M step function."""

    resolution: int
    coeffs: tuple

    def __post_init__(self) -> None:
        if len(self.coeffs) != (1 << self.resolution):
            raise ValueError("coefficient count must be 2**resolution")


def fwht(f: StepFunction) -> WalshSpectrum:
    """Exact Walsh-Paley coefficients via the fast butterfly."""
    raw = _hadamard(list(f.values))
    return WalshSpectrum(f.resolution, tuple(_div_pow2(c, f.resolution) for c in raw))


def synthesize(spectrum: WalshSpectrum) -> StepFunction:
    """Inverse transform: sum of coeffs[k] * w_k, reconstructing f exactly."""
    return StepFunction(spectrum.resolution, tuple(_hadamard(list(spectrum.coeffs))))


def rademacher(k: int, resolution: int) -> StepFunction:
    """r_k(x) = (-1)**x_k."""
    if not 0 <= k < resolution:
        raise ValueError(f"Rademacher level {k} needs resolution > {k}")
    return walsh(1 << k, resolution)


def walsh(n: int, resolution: int) -> StepFunction:
    """w_n, the product of Rademacher functions selected by the bits of n."""
    if n < 0:
        raise ValueError("Walsh index must be nonnegative")
    if n >= (1 << resolution):
        raise ValueError(f"Walsh index {n} needs resolution > {bit_order(n)}")
    signs = walsh_signs(n, resolution)
    return StepFunction(resolution, tuple(int(s) for s in signs))


def default_kernel_resolution(n: int) -> int:
    """Coarsest resolution on which D_n and K_n are constant on cells."""
    return bit_order(n) + 1


def _check_kernel_args(n: int, resolution: int) -> None:
    if n < 1:
        raise ValueError("kernel index must be >= 1")
    if n > (1 << resolution):
        raise ValueError(f"kernel index {n} exceeds 2**{resolution}; raise the resolution")


def dirichlet_values(n: int, resolution: int) -> np.ndarray:
    """Integer cell values of D_n."""
    _check_kernel_args(n, resolution)
    coeffs = np.zeros(1 << resolution, dtype=np.int64)
    coeffs[:n] = 1
    return _fwht_int(coeffs)


def scaled_fejer_values(n: int, resolution: int) -> np.ndarray:
    """Integer cell values of n * K_n (coefficients n - j for j < n)."""
    _check_kernel_args(n, resolution)
    coeffs = np.zeros(1 << resolution, dtype=np.int64)
    coeffs[:n] = np.arange(n, 0, -1, dtype=np.int64)
    return _fwht_int(coeffs)


def dirichlet(n: int, resolution: int | None = None) -> StepFunction:
    """D_n, the sum of the first n Walsh functions."""
    if resolution is None:
        resolution = default_kernel_resolution(n)
    vals = dirichlet_values(n, resolution)
    return StepFunction(resolution, tuple(int(v) for v in vals))


def fejer_kernel(n: int, resolution: int | None = None) -> StepFunction:
    """K_n, the arithmetic mean of D_1 .. D_n."""
    if resolution is None:
        resolution = default_kernel_resolution(n)
    vals = scaled_fejer_values(n, resolution)
    return StepFunction(resolution, tuple(Fraction(int(v), n) for v in vals))


def fejer_closed_form(n: int, resolution: int | None = None) -> StepFunction:
    """K_{2**n} assembled from its case formula, without any summation.

    The kernel equals (2**n + 1)/2 on I_n, 2**(t-1) on I_n(e_t) for t < n,
    and vanishes elsewhere.
    """
    if n < 0:
        raise ValueError("exponent must be nonnegative")
    if resolution is None:
        resolution = n + 1
    if resolution <= n:
        raise ValueError("resolution must exceed the exponent")
    mask = (1 << n) - 1
    centre = Fraction((1 << n) + 1, 2)
    vals = []
    for b in range(1 << resolution):
        low = b & mask
        if low == 0:
            vals.append(centre)
        elif low & (low - 1) == 0:
            t = low.bit_length() - 1
            vals.append(Fraction(1, 2) if t == 0 else Fraction(1 << (t - 1)))
        else:
            vals.append(Fraction(0))
    return StepFunction(resolution, tuple(vals))


def partial_sum(f: StepFunction, n: int) -> StepFunction:
    """S_n f, the sum of the first n terms of the Walsh-Fourier series (S_0 f = 0)."""
    if n < 0:
        raise ValueError("partial sum index must be nonnegative")
    if n == 0:
        return StepFunction.zero(f.resolution)
    spec = fwht(f)
    cut = min(n, len(spec.coeffs))
    coeffs = spec.coeffs[:cut] + (0,) * (len(spec.coeffs) - cut)
    return synthesize(WalshSpectrum(f.resolution, coeffs))


def fejer_mean(f: StepFunction, n: int) -> StepFunction:
    """sigma_n f, the arithmetic mean of S_1 f .. S_n f.

    Computed through the spectrum: the coefficient of w_j picks up the
    weight (n - j)/n for j < n.  Indices n beyond 2**M are allowed; the
    weights simply saturate the whole spectrum.
    """
    if n < 1:
        raise ValueError("Fejér mean index must be >= 1")
    spec = fwht(f)
    size = len(spec.coeffs)
    coeffs = tuple(
        spec.coeffs[j] * Fraction(n - j, n) if j < n else Fraction(0)
        for j in range(size)
    )
    return synthesize(WalshSpectrum(f.resolution, coeffs))


def fejer_mean_sweep(f: StepFunction, n_max: int):
    """Yield (n, sigma_n f) for n = 1 .. n_max with incremental running sums.

    Keeps S_n and the accumulated sum of partial sums, so a full sweep costs
    O(n_max * 2**M) exact operations instead of one transform per index.
    """
    if n_max < 1:
        raise ValueError("sweep needs n_max >= 1")
    size = 1 << f.resolution
    coeffs = _hadamard(list(f.values))  # 2**M * fourier coefficients
    partial = [0] * size
    acc = [0] * size
    for n in range(1, n_max + 1):
        if n - 1 < size:
            c = coeffs[n - 1]
            if c:
                signs = walsh_signs(n - 1, f.resolution)
                scaled = _div_pow2(c, f.resolution)
                for b in range(size):
                    partial[b] += scaled if signs[b] > 0 else -scaled
        for b in range(size):
            acc[b] += partial[b]
        yield n, StepFunction(f.resolution, tuple(v / n if isinstance(v, Fraction) else Fraction(v, n) for v in acc))


def conjugate_transform(f: StepFunction, t: DyadicPoint) -> StepFunction:
    """Flip the martingale differences of f by the Rademacher signs at t.

    Returns sum over n of r_n(t) (E_n f - E_{n-1} f) with E_{-1} f = 0;
    coordinates of t beyond its resolution count as zero.  Applying the
    transform twice with the same t restores f, and t = 0 leaves f fixed.
    """
    result = StepFunction.zero(f.resolution)
    prev = StepFunction.zero(f.resolution)
    for n in range(f.resolution + 1):
        cur = conditional_expectation(f, n)
        diff = cur - prev
        result = result + diff if t.coord(n) == 0 else result - diff
        prev = cur
    return result


def kernel_decomposition_residual(n: int) -> StepFunction:
    """Difference between n*K_n and its two-sum decomposition over the set bits of n.

    Writing n as a sum of distinct powers 2**p, the decomposition rebuilds
    n*K_n from the dyadic kernels 2**p K_{2**p} and D_{2**p}, each twisted
    by the Walsh function carrying the higher bits of n.  The residual is
    identically zero; it is returned as a step function so that any
    violation is visible cell by cell.
    """
    if n < 1:
        raise ValueError("index must be >= 1")
    resolution = default_kernel_resolution(n)
    size = 1 << resolution
    lhs2 = 2 * scaled_fejer_values(n, resolution)
    rhs2 = np.zeros(size, dtype=np.int64)
    positions = [p for p in range(n.bit_length()) if (n >> p) & 1]
    for idx, p in enumerate(positions):
        tail = (n >> (p + 1)) << (p + 1)
        signs = walsh_signs(tail, resolution)
        rhs2 += signs * (2 * scaled_fejer_values(1 << p, resolution))
        if idx >= 1:
            prefix = n & ((1 << p) - 1)
            rhs2 += signs * (2 * prefix * dirichlet_values(1 << p, resolution))
    diff = lhs2 - rhs2
    return StepFunction(resolution, tuple(Fraction(int(v), 2) for v in diff))


def dirichlet_shift_residual(j: int, m: int) -> StepFunction:
    """D_{j + 2**m} - D_{2**m} - w_{2**m} D_j, identically zero for 1 <= j < 2**m."""
    if not 1 <= j < (1 << m):
        raise ValueError(f"shift index {j} must satisfy 1 <= j < 2**{m}")
    resolution = m + 1
    vals = (
        dirichlet_values(j + (1 << m), resolution)
        - dirichlet_values(1 << m, resolution)
        - walsh_signs(1 << m, resolution) * dirichlet_values(j, resolution)
    )
    return StepFunction(resolution, tuple(int(v) for v in vals))


def coset_kernel_integrals(n: int, depth: int) -> tuple[int, np.ndarray]:
    """Integrals of |K_n| over all depth-``depth`` cosets, as scaled integers.

    Returns (resolution, sums) where sums[lo] * 2**-resolution / n is the
    exact integral of |K_n| over the coset of I_depth anchored at lo.
    """
    resolution = max(default_kernel_resolution(n), depth)
    vals = np.abs(scaled_fejer_values(n, resolution))
    sums = vals.reshape(-1, 1 << depth).sum(axis=0, dtype=np.int64)
    return resolution, sums


def kernel_tail_integral_ratio(n: int, depth: int, x: DyadicPoint) -> Fraction:
    """Observed-to-structural ratio for the tail integral of |K_n| near x.

    The tail integral is the integral of |K_n(x + t)| over t in I_depth,
    for n > 2**depth.  Its structural factor depends on where x sits in the
    complement partition of I_depth: 2**(l+k) / (n 2**depth) on the piece
    anchored at e_k + e_l, and 2**k / 2**depth on the piece anchored at
    e_k.  The returned exact ratio is the empirical constant at (n, x).
    """
    if n <= (1 << depth):
        raise ValueError(f"tail bound needs n > 2**{depth}")
    if x.resolution < depth:
        raise ValueError("point resolution coarser than the integration depth")
    where = classify_off_cell(x.index, depth)  # raises inside I_depth
    if isinstance(where, tuple):
        k, l = where
        factor = Fraction(1 << (l + k), n << depth)
    else:
        factor = Fraction(1 << where, 1 << depth)
    resolution, sums = coset_kernel_integrals(n, depth)
    lo = x.index & ((1 << depth) - 1)
    lhs = Fraction(int(sums[lo]), n << resolution)
    return lhs / factor


@dataclass(frozen=True)
class KernelBlockBound:
    """Lower bound for n|K_n| on the probe cell of one bit block of n."""

    block_index: int
    low_bit: int
    high_bit: int
    min_value: Fraction | None
    bound: Fraction | None
    passed: bool | None

    @property
    def skipped(self) -> bool:
        return self.passed is None


def kernel_block_lower_bounds(n: int) -> list[KernelBlockBound]:
    """Check n|K_n| >= 2**(2l)/16 on I_{l+1}(e_{l-1} + e_l) for each bit block.

    Blocks whose low bit l is 0 have no probe cell (e_{-1} does not exist)
    and are reported as skipped.
    """
    decomposition = block_decomposition(n)
    resolution = default_kernel_resolution(n)
    vals = np.abs(scaled_fejer_values(n, resolution))
    cells = np.arange(1 << resolution)
    records = []
    for i, (lo, hi) in enumerate(decomposition.blocks, start=1):
        if lo == 0:
            records.append(KernelBlockBound(i, lo, hi, None, None, None))
            continue
        pattern = (1 << (lo - 1)) | (1 << lo)
        mask = (1 << (lo + 1)) - 1
        members = vals[(cells & mask) == pattern]
        min_value = Fraction(int(members.min()))
        bound = Fraction(1 << (2 * lo), 16)
        records.append(KernelBlockBound(i, lo, hi, min_value, bound, min_value >= bound))
    return records


@dataclass(frozen=True)
class KernelBlockProofTerms:
    """The three exact terms of the block lower-bound chain at one probe cell."""

    low_bit: int
    main: Fraction            # |2**l K_{2**l}| on the cell; equals 2**(2l)/4
    second: Fraction          # sum of 2**k |K_{2**k}| over earlier blocks
    second_bound: Fraction    # 2**(2l)/24 + 2**l/4 - 2/3
    third: Fraction           # sum of 2**k |D_{2**k}| over earlier blocks
    third_bound: Fraction     # 2**(2l)/12 - 1/3

    @property
    def passed(self) -> bool:
        return (
            self.main == Fraction(1 << (2 * self.low_bit), 4)
            and self.second <= self.second_bound
            and self.third <= self.third_bound
        )


def kernel_block_proof_terms(n: int, block_index: int) -> KernelBlockProofTerms:
    """Evaluate the bound chain for one block of n at its probe cell, exactly.

    All kernels involved are constant on the probe cell I_{l+1}(e_{l-1}+e_l),
    so a single cell evaluation is exact.
    """
    blocks = block_decomposition(n).blocks
    if not 1 <= block_index <= len(blocks):
        raise ValueError(f"block index {block_index} out of range for n={n}")
    lo, _ = blocks[block_index - 1]
    if lo < 1:
        raise ValueError("block with low bit 0 has no probe cell")
    point = DyadicPoint(lo + 1, (1 << (lo - 1)) | (1 << lo))
    main = abs((1 << lo) * fejer_kernel(1 << lo, lo + 1).value_at(point.refine(lo + 1)))
    second = Fraction(0)
    third = Fraction(0)
    for r in range(block_index - 1):
        b_lo, b_hi = blocks[r]
        for k in range(b_lo, b_hi + 1):
            res = max(k + 1, lo + 1)
            pt = point.refine(res)
            second += (1 << k) * abs(fejer_kernel(1 << k, res).value_at(pt))
            third += (1 << k) * abs(dirichlet(1 << k, res).value_at(pt))
    l = lo
    return KernelBlockProofTerms(
        low_bit=l,
        main=Fraction(main),
        second=second,
        second_bound=Fraction(1 << (2 * l), 24) + Fraction(1 << l, 4) - Fraction(2, 3),
        third=third,
        third_bound=Fraction(1 << (2 * l), 12) - Fraction(1, 3),
    )
