"""Finite dyadic martingales, atoms, and Hardy-space quasinorms.

A finite dyadic martingale is stored through its terminal function: the
level-n function is the conditional expectation of the terminal at depth n,
which for Walsh series coincides with the 2**n-th partial sum.  On top of
this sit the p-atom machinery and the two explicit martingale families used
by the divergence experiments: a single-block family (one dyadic block of
flat coefficients) and a lacunary family whose coefficient heights grow
with a weight function.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .dyadic import DyadicInterval, bit_order, zero_interval
from .stepfn import (
    PRECISION_BITS,
    QuasinormValue,
    StepFunction,
    _div_pow2,
    conditional_expectation,
    lp_quasinorm,
    rational_pow,
)
from .walsh import WalshSpectrum, _fwht_int, fwht, scaled_fejer_values, synthesize


@dataclass(frozen=True)
class DyadicMartingale:
    """A finite dyadic martingale (F_0, ..., F_M) with F_n = E_n(terminal)."""

    terminal: StepFunction

    @property
    def resolution(self) -> int:
        return self.terminal.resolution

    def level(self, n: int) -> StepFunction:
        return conditional_expectation(self.terminal, n)

    def levels(self) -> list[StepFunction]:
        return [self.level(n) for n in range(self.resolution + 1)]

    def coefficients(self) -> WalshSpectrum:
        """Walsh-Fourier coefficients; for this regular family they are the terminal's."""
        return fwht(self.terminal)


def maximal_function(F: DyadicMartingale) -> StepFunction:
    """Pointwise maximum of |F_n| over all levels (the sup is a max here).

    Levels are produced by averaging out one coordinate at a time, top
    down, so the whole chain costs O(M * 2**M) exact operations.
    """
    size = 1 << F.resolution
    current = list(F.terminal.values)
    best = [abs(v) for v in current]
    for n in range(F.resolution - 1, -1, -1):
        bit = 1 << n
        for b in range(size):
            if not b & bit:
                s = current[b] + current[b | bit]
                avg = s / 2 if isinstance(s, Fraction) else Fraction(s, 2)
                current[b] = avg
                current[b | bit] = avg
        for b in range(size):
            a = abs(current[b])
            if a > best[b]:
                best[b] = a
    return StepFunction(F.resolution, tuple(best))


def averaged_maximal_function(f: StepFunction) -> StepFunction:
    """sup over n of |average of f over I_n(x)|, computed from interval sums.

    Independent route to the martingale maximal function: it agrees with
    maximal_function of the martingale generated by f, pointwise.
    """
    size = 1 << f.resolution
    best = [Fraction(0)] * size
    for n in range(f.resolution + 1):
        step = 1 << n
        width = f.resolution - n
        means = [abs(_div_pow2(sum(f.values[r::step]), width)) for r in range(step)]
        for b in range(size):
            m = means[b & (step - 1)]
            if m > best[b]:
                best[b] = m
    return StepFunction(f.resolution, tuple(best))


def hp_quasinorm(F: DyadicMartingale, p: Fraction) -> QuasinormValue:
    """Hardy quasinorm: the L_p quasinorm of the maximal function."""
    return lp_quasinorm(maximal_function(F), p)


class AtomError(ValueError):
    """An atom candidate violating one of the three defining clauses."""


class AtomMeanError(AtomError):
    """Clause (a): the integral over the supporting interval is nonzero."""


class AtomBoundError(AtomError):
    """Clause (b): the sup norm exceeds measure(I) ** (-1/p)."""


class AtomSupportError(AtomError):
    """Clause (c): the function does not vanish off the supporting interval."""


@dataclass(frozen=True)
class PAtom:
    """A validated p-atom: mean zero on I, bounded by measure(I)**(-1/p), supported in I."""

    support: DyadicInterval
    p: Fraction
    fn: StepFunction


def validate_atom(a: StepFunction, support: DyadicInterval, p: Fraction) -> PAtom:
    """Check the three atom clauses and return the validated atom.

    Violations raise AtomMeanError, AtomBoundError or AtomSupportError, in
    that order of inspection.  The sup-norm comparison |v| <= 2**(N/p) is
    done exactly by raising both sides to the numerator of p.
    """
    p = Fraction(p)
    if not 0 < p <= 1:
        raise ValueError("atom exponent must lie in (0, 1]")
    if a.resolution < support.depth:
        raise ValueError("atom resolution coarser than its supporting interval")
    inside = set(support.cell_indices(a.resolution))
    mean = sum(a.values[b] for b in inside)
    if mean != 0:
        raise AtomMeanError(
            f"clause (a): integral over the support is {_div_pow2(mean, a.resolution)}, not 0"
        )
    exp_num, exp_den = p.numerator, p.denominator
    bound_pow = 1 << (support.depth * exp_den)  # (2**(N/p)) ** p.numerator
    worst = max(abs(Fraction(v)) for v in a.values)
    if worst**exp_num > bound_pow:
        raise AtomBoundError(
            f"clause (b): sup norm {worst} exceeds measure(I)**(-1/p) = 2**({support.depth}/{p})"
        )
    for b in range(1 << a.resolution):
        if b not in inside and a.values[b] != 0:
            raise AtomSupportError(f"clause (c): nonzero value on cell {b} outside the support")
    return PAtom(support=support, p=p, fn=a)


def haar_atom(depth: int, p: Fraction, resolution: int | None = None) -> PAtom:
    """The canonical saturating p-atom on I_depth.

    Equals 2**(depth (1/p - 1)) (D_{2**(depth+1)} - D_{2**depth}): a flat
    block of Walsh frequencies, supported on I_depth with mean zero and sup
    norm exactly measure(I)**(-1/p).
    """
    p = Fraction(p)
    if resolution is None:
        resolution = depth + 1
    if resolution < depth + 1:
        raise ValueError("resolution must reach depth + 1 to hold the atom")
    scale = rational_pow(Fraction(2), depth * (1 / p - 1))
    if scale is None:
        raise ValueError(f"2**({depth}(1/p - 1)) is irrational for p={p}")
    block = 1 << depth
    coeffs = [Fraction(0)] * (1 << resolution)
    for j in range(block, 2 * block):
        coeffs[j] = scale
    fn = synthesize(WalshSpectrum(resolution, tuple(coeffs)))
    return validate_atom(fn, zero_interval(depth), p)


def atomic_martingale(
    coeffs: "list[tuple[Fraction, PAtom]]", resolution: int
) -> DyadicMartingale:
    """Martingale with terminal sum of mu_k a_k, truncated at resolution M.

    Every level n is then the sum of mu_k S_{2**n} a_k, which the tests
    check against independently computed partial sums.
    """
    terminal = StepFunction.zero(resolution)
    for weight, atom in coeffs:
        if atom.fn.resolution > resolution:
            raise ValueError("atom resolution exceeds the martingale resolution")
        terminal = terminal + atom.fn.refine(resolution) * Fraction(weight)
    return DyadicMartingale(terminal)


@dataclass(frozen=True)
class PhiFunction:
    """A nondecreasing weight with Phi(n) >= 1, one of: one, log2sq, pow:<expo>."""

    name: str

    def __post_init__(self) -> None:
        if self.name in ("one", "log2sq"):
            return
        if self.name.startswith("pow:"):
            expo = Fraction(self.name[4:])
            if expo < 0:
                raise ValueError("pow weight needs a nonnegative exponent")
            return
        raise ValueError(f"unknown weight function {self.name!r}")

    @property
    def _pow_exponent(self) -> Fraction:
        return Fraction(self.name[4:])

    def exact_pow_at_pow2(self, j: int, expo: Fraction) -> Fraction | None:
        """Phi(2**j) ** expo as an exact rational, or None if irrational."""
        if self.name == "one":
            return Fraction(1)
        if self.name == "log2sq":
            return rational_pow(Fraction(max(1, j * j)), expo)
        return rational_pow(Fraction(2), j * self._pow_exponent * expo)

    def weight(self, n: int) -> mpmath.mpf:
        """Numeric Phi(n) for arbitrary positive n."""
        if n < 1:
            raise ValueError("weights are defined for n >= 1")
        with mpmath.workprec(PRECISION_BITS):
            if self.name == "one":
                return mpmath.mpf(1)
            if self.name == "log2sq":
                return max(mpmath.mpf(1), mpmath.log(n, 2) ** 2)
            e = self._pow_exponent
            return mpmath.mpf(n) ** (mpmath.mpf(e.numerator) / e.denominator)


@dataclass(frozen=True)
class LacunarySpec:
    """Parameters of the lacunary divergence martingale.

    The indices alphas enter only through their binary orders, which must
    be at least 2 (the probe cell argument needs the two lowest
    coordinates free) and strictly increasing.  The atom weights
    lambda_k = Phi(2**(o_k + 1)) ** (1/2p) / 2**(o_k (1/p - 1)) are
    recomputed from (p, phi) and must come out rational.
    """

    p: Fraction
    phi: PhiFunction
    alphas: tuple[int, ...]
    resolution: int

    def __post_init__(self) -> None:
        p = Fraction(self.p)
        if not 0 < p < 1:
            raise ValueError("exponent p must lie in (0, 1)")
        if not self.alphas:
            raise ValueError("at least one index is required")
        orders = [bit_order(a) for a in self.alphas]
        if any(o < 2 for o in orders):
            raise ValueError("every index must have binary order >= 2")
        if any(b <= a for a, b in zip(orders, orders[1:])):
            raise ValueError("index orders must be strictly increasing")
        if self.resolution < orders[-1] + 1:
            raise ValueError(
                f"resolution {self.resolution} cannot hold frequencies up to "
                f"2**{orders[-1] + 1}"
            )

    @classmethod
    def create(
        cls,
        p: Fraction,
        phi: PhiFunction,
        alphas: "tuple[int, ...] | list[int]",
        resolution: int | None = None,
    ) -> "LacunarySpec":
        alphas = tuple(alphas)
        if resolution is None:
            resolution = max(bit_order(a) for a in alphas) + 1
        return cls(p=Fraction(p), phi=phi, alphas=alphas, resolution=resolution)

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(bit_order(a) for a in self.alphas)

    def coefficient_height(self, k: int) -> Fraction:
        """Phi(2**(o_k + 1)) ** (1/2p): the flat spectrum height on block k."""
        o = self.orders[k]
        height = self.phi.exact_pow_at_pow2(o + 1, 1 / (2 * self.p))
        if height is None:
            raise ValueError(
                f"Phi(2**{o + 1}) ** (1/(2p)) is irrational for p={self.p}, phi={self.phi.name}"
            )
        return height

    def lam(self, k: int) -> Fraction:
        """Atom weight lambda_k, derived rather than stored."""
        o = self.orders[k]
        denom = rational_pow(Fraction(2), o * (1 / self.p - 1))
        if denom is None:
            raise ValueError(f"2**({o}(1/p - 1)) is irrational for p={self.p}")
        return self.coefficient_height(k) / denom

    def summability_surrogate(self) -> mpmath.mpf:
        """Finite version of the weight summability series over the index list."""
        with mpmath.workprec(PRECISION_BITS):
            total = mpmath.mpf(0)
            for o in self.orders:
                total += mpmath.sqrt(self.phi.weight(1 << (o + 1))) / mpmath.mpf(2) ** (
                    o * (1 - float(self.p))
                )
            return total


def default_lacunary_spec() -> LacunarySpec:
    """Default experiment parameters: p = 1/4, squared-log weight, orders 2, 4, 8."""
    return LacunarySpec.create(
        p=Fraction(1, 4),
        phi=PhiFunction("log2sq"),
        alphas=(4, 16, 256),
    )


def parse_lacunary_spec(text: str) -> LacunarySpec:
    """Parse the plain-text format: lines p=<rational>, alpha=<ints>, phi=<name>."""
    p: Fraction | None = None
    alphas: tuple[int, ...] | None = None
    phi: PhiFunction | None = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key == "p":
            p = Fraction(value)
        elif key == "alpha":
            alphas = tuple(int(x) for x in value.split(",") if x.strip())
        elif key == "phi":
            phi = PhiFunction(value)
        else:
            raise ValueError(f"unknown spec line {raw!r}")
    if p is None or alphas is None or phi is None:
        raise ValueError("spec file must define p=, alpha= and phi=")
    return LacunarySpec.create(p=p, phi=phi, alphas=alphas)


def lacunary_atom(spec: LacunarySpec, k: int) -> PAtom:
    """The k-th canonical atom of the lacunary construction."""
    return haar_atom(spec.orders[k], spec.p, spec.resolution)


def build_lacunary_martingale(spec: LacunarySpec) -> DyadicMartingale:
    """Assemble the lacunary martingale from its flat coefficient blocks.

    The terminal's spectrum carries the height Phi(2**(o_k+1))**(1/2p) on
    each dyadic block [2**o_k, 2**(o_k+1)); this equals the atomic sum
    of lambda_k times the canonical atoms.
    """
    coeffs = [Fraction(0)] * (1 << spec.resolution)
    for k, o in enumerate(spec.orders):
        height = spec.coefficient_height(k)
        for j in range(1 << o, 1 << (o + 1)):
            coeffs[j] = height
    terminal = synthesize(WalshSpectrum(spec.resolution, tuple(coeffs)))
    return DyadicMartingale(terminal)


def build_block_martingale(m: int, resolution: int | None = None) -> DyadicMartingale:
    """The single-block martingale with terminal 2**m (D_{2**(m+1)} - D_{2**m}).

    Its coefficients are 2**m across the dyadic block [2**m, 2**(m+1)) and
    vanish elsewhere; the Hardy H_{1/2} quasinorm is exactly 1.
    """
    if m < 0:
        raise ValueError("block exponent must be nonnegative")
    if resolution is None:
        resolution = m + 1
    if resolution < m + 1:
        raise ValueError("resolution must be at least m + 1")
    coeffs = np.zeros(1 << resolution, dtype=np.int64)
    coeffs[1 << m : 1 << (m + 1)] = 1 << m
    vals = _fwht_int(coeffs)
    return DyadicMartingale(StepFunction(resolution, tuple(int(v) for v in vals)))


def fejer_mean_shift_residual(m: int, n: int) -> StepFunction:
    """|sigma_{n + 2**m} F_m| - (2**m / (n + 2**m)) n |K_n| for the block martingale.

    Identically zero for 0 < n < 2**m: past the block start, the Fejér mean
    of F_m is a rescaled, Walsh-twisted copy of the shifted Fejér kernel.
    Both sides are assembled as integer arrays scaled by n + 2**m.
    """
    if not 0 < n < (1 << m):
        raise ValueError(f"shift index must satisfy 0 < n < 2**{m}")
    resolution = m + 1
    total = n + (1 << m)
    coeffs = np.zeros(1 << resolution, dtype=np.int64)
    js = np.arange(1 << m, total, dtype=np.int64)
    coeffs[1 << m : total] = (1 << m) * (total - js)
    lhs = np.abs(_fwht_int(coeffs))  # (n + 2**m) |sigma_{n+2**m} F_m|
    rhs = (1 << m) * np.abs(scaled_fejer_values(n, resolution))
    return StepFunction(resolution, tuple(Fraction(int(v), total) for v in lhs - rhs))
