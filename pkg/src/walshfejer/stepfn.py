"""Exact step functions on the dyadic group.

A function constant on resolution-M cells is stored as 2**M exact rational
values, entry b holding the value on the cell with coordinate bits b.  All
arithmetic stays in ``fractions.Fraction`` (plain ints are kept as ints,
which are exact rationals too).  Powers that leave the rationals are
evaluated with mpmath at PRECISION_BITS of mantissa; comparisons against
such values use REL_TOL.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import mpmath

from .dyadic import DyadicInterval, DyadicPoint

PRECISION_BITS = 96
REL_TOL = Fraction(1, 10**12)


def _require_exact(value) -> "int | Fraction":
    if isinstance(value, bool) or not isinstance(value, Rational):
        raise TypeError(f"step function values must be exact rationals, got {value!r}")
    return value


def _div_pow2(value, shift: int):
    """Exact value / 2**shift."""
    if isinstance(value, int):
        return Fraction(value, 1 << shift)
    return value / (1 << shift)


def to_mpf(value) -> mpmath.mpf:
    """Round an exact rational to the working precision."""
    with mpmath.workprec(PRECISION_BITS):
        if isinstance(value, int):
            return mpmath.mpf(value)
        return mpmath.mpf(value.numerator) / value.denominator


def int_root(n: int, k: int) -> int | None:
    """Exact k-th root of a nonnegative integer, or None if it is not a power."""
    if n < 0 or k < 1:
        raise ValueError("int_root needs n >= 0 and k >= 1")
    if n in (0, 1) or k == 1:
        return n
    x = 1 << ((n.bit_length() + k - 1) // k)  # upper bound for the root
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    return x if x**k == n else None


def rational_root(q: Fraction, k: int) -> Fraction | None:
    """Exact k-th root of a nonnegative rational, or None."""
    num = int_root(q.numerator, k)
    if num is None:
        return None
    den = int_root(q.denominator, k)
    if den is None:
        return None
    return Fraction(num, den)


def rational_pow(base: Fraction, expo: Fraction) -> Fraction | None:
    """base**expo as an exact rational, or None when the result is irrational."""
    base = Fraction(base)
    expo = Fraction(expo)
    if base < 0:
        raise ValueError("rational_pow needs a nonnegative base")
    if base == 0:
        if expo <= 0:
            raise ValueError("0 cannot be raised to a nonpositive power")
        return Fraction(0)
    if expo < 0:
        inv = rational_pow(base, -expo)
        return None if inv is None else 1 / inv
    powered = base ** int(expo.numerator)
    return rational_root(powered, expo.denominator)


@dataclass(frozen=True)
class QuasinormValue:
    """A nonnegative norm value, exact when the power stays rational."""

    exact: Fraction | None
    approx: mpmath.mpf

    @classmethod
    def from_exact(cls, value) -> "QuasinormValue":
        value = Fraction(value)
        if value < 0:
            raise ValueError("quasinorms are nonnegative")
        return cls(exact=value, approx=to_mpf(value))

    @classmethod
    def from_approx(cls, value: mpmath.mpf) -> "QuasinormValue":
        if value < 0:
            raise ValueError("quasinorms are nonnegative")
        return cls(exact=None, approx=+value)

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    def __float__(self) -> float:
        return float(self.approx)

    def pow(self, expo: Fraction) -> "QuasinormValue":
        expo = Fraction(expo)
        if self.exact is not None:
            exact = rational_pow(self.exact, expo)
            if exact is not None:
                return QuasinormValue.from_exact(exact)
        with mpmath.workprec(PRECISION_BITS):
            base = to_mpf(self.exact) if self.exact is not None else self.approx
            return QuasinormValue.from_approx(base ** to_mpf(expo))

    def __str__(self) -> str:
        if self.exact is not None:
            return f"{self.exact.numerator}/{self.exact.denominator}"
        return mpmath.nstr(self.approx, 24)


@dataclass(frozen=True)
class StepFunction:
    """A function on the dyadic group constant on resolution-M cells."""

    resolution: int
    values: tuple

    def __post_init__(self) -> None:
        if self.resolution < 0:
            raise ValueError("resolution must be nonnegative")
        if len(self.values) != (1 << self.resolution):
            raise ValueError(
                f"expected {1 << self.resolution} cell values, got {len(self.values)}"
            )
        for v in self.values:
            _require_exact(v)

    @classmethod
    def constant(cls, value, resolution: int) -> "StepFunction":
        return cls(resolution, ((_require_exact(value)),) * (1 << resolution))

    @classmethod
    def zero(cls, resolution: int) -> "StepFunction":
        return cls.constant(0, resolution)

    @classmethod
    def indicator(cls, interval: DyadicInterval, resolution: int) -> "StepFunction":
        vals = [0] * (1 << resolution)
        for b in interval.cell_indices(resolution):
            vals[b] = 1
        return cls(resolution, tuple(vals))

    def refine(self, resolution: int) -> "StepFunction":
        """Re-express on finer cells; pointwise values are unchanged."""
        if resolution < self.resolution:
            raise ValueError("cannot coarsen a step function by refining")
        if resolution == self.resolution:
            return self
        mask = (1 << self.resolution) - 1
        vals = tuple(self.values[b & mask] for b in range(1 << resolution))
        return StepFunction(resolution, vals)

    def value_at(self, point: DyadicPoint):
        if point.resolution < self.resolution:
            raise ValueError("point resolution too coarse to select a cell")
        return self.values[point.index & ((1 << self.resolution) - 1)]

    def translate(self, point: DyadicPoint) -> "StepFunction":
        """x -> f(x + t), i.e. relabel cells by XOR with the point's index."""
        res = max(self.resolution, point.resolution)
        f = self.refine(res)
        t = point.index
        return StepFunction(res, tuple(f.values[b ^ t] for b in range(1 << res)))

    def __add__(self, other: "StepFunction") -> "StepFunction":
        f, g = _common(self, other)
        return StepFunction(f.resolution, tuple(a + b for a, b in zip(f.values, g.values)))

    def __sub__(self, other: "StepFunction") -> "StepFunction":
        f, g = _common(self, other)
        return StepFunction(f.resolution, tuple(a - b for a, b in zip(f.values, g.values)))

    def __neg__(self) -> "StepFunction":
        return StepFunction(self.resolution, tuple(-a for a in self.values))

    def __mul__(self, other):
        if isinstance(other, StepFunction):
            f, g = _common(self, other)
            return StepFunction(f.resolution, tuple(a * b for a, b in zip(f.values, g.values)))
        scalar = _require_exact(other)
        return StepFunction(self.resolution, tuple(a * scalar for a in self.values))

    __rmul__ = __mul__

    def __abs__(self) -> "StepFunction":
        return StepFunction(self.resolution, tuple(abs(a) for a in self.values))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StepFunction):
            return NotImplemented
        f, g = _common(self, other)
        return all(a == b for a, b in zip(f.values, g.values))

    def __hash__(self) -> int:  # pointwise equality across resolutions
        base = self.values
        m = self.resolution
        while m > 0 and all(base[b] == base[b & ((1 << (m - 1)) - 1)] for b in range(1 << m)):
            m -= 1
            base = base[: 1 << m]
        return hash((m, tuple(Fraction(v) for v in base)))

    def is_zero(self) -> bool:
        return all(v == 0 for v in self.values)

    def max_abs(self):
        """Sup norm (a max over cells at finite resolution)."""
        return max(abs(v) for v in self.values)


def _common(f: StepFunction, g: StepFunction) -> tuple[StepFunction, StepFunction]:
    res = max(f.resolution, g.resolution)
    return f.refine(res), g.refine(res)


def integrate(f: StepFunction) -> Fraction:
    """Integral against the Haar measure: the exact mean of the cell values."""
    return Fraction(_div_pow2(sum(f.values), f.resolution))


def lp_power(f: StepFunction, p: Fraction) -> QuasinormValue:
    """The p-th power integral of |f|, exact whenever every |value|**p is rational."""
    p = Fraction(p)
    if p <= 0:
        raise ValueError("lp exponent must be positive")
    a, b = p.numerator, p.denominator
    exact_terms: dict = {}
    exact_ok = True
    for v in set(f.values):
        v = abs(Fraction(v))
        r = rational_root(v**a, b) if exact_ok else None
        if r is None:
            exact_ok = False
            break
        exact_terms[v] = r
    if exact_ok:
        total = sum(exact_terms[abs(Fraction(v))] for v in f.values)
        return QuasinormValue.from_exact(_div_pow2(total, f.resolution))
    with mpmath.workprec(PRECISION_BITS):
        cache: dict = {}
        total = mpmath.mpf(0)
        for v in f.values:
            v = abs(Fraction(v))
            term = cache.get(v)
            if term is None:
                term = to_mpf(v) ** to_mpf(p) if v else mpmath.mpf(0)
                cache[v] = term
            total += term
        return QuasinormValue.from_approx(total / (1 << f.resolution))


def lp_quasinorm(f: StepFunction, p: Fraction) -> QuasinormValue:
    """(integral of |f|**p)**(1/p), exact for p = 1 and whenever radicals collapse.

    Writing p = a/b, the cell contributions are (|v|**a)**(1/b).  When all
    nonzero |v|**a share a common factor c with rational b-th-root quotients,
    the quasinorm equals c**(1/a) (T/2**M)**(b/a) for a rational T; this
    covers constants, perfect powers, and two-valued kernels like the dyadic
    Dirichlet blocks at p = 1/2.  Otherwise the value is numeric.
    """
    p = Fraction(p)
    if p <= 0:
        raise ValueError("lp exponent must be positive")
    if p == 1:
        return QuasinormValue.from_exact(integrate(abs(f)))
    a, b = p.numerator, p.denominator
    quotient_roots: dict = {}
    common = None
    total = Fraction(0)
    exact_ok = True
    for v in f.values:
        v = abs(Fraction(v))
        if v == 0:
            continue
        u = v**a
        if common is None:
            common = u
        r = quotient_roots.get(u)
        if r is None:
            r = rational_root(u / common, b)
            if r is None:
                exact_ok = False
                break
            quotient_roots[u] = r
        total += r
    if common is None:
        return QuasinormValue.from_exact(0)
    if exact_ok:
        outer = rational_pow(_div_pow2(total, f.resolution), Fraction(b, a))
        inner = rational_root(common, a)
        if outer is not None and inner is not None:
            return QuasinormValue.from_exact(inner * outer)
    return lp_power(f, p).pow(1 / p)


def weak_lp_quasinorm(f: StepFunction, p: Fraction) -> QuasinormValue:
    """sup over lambda of lambda * mu(|f| > lambda)**(1/p).

    For a step function the distribution function jumps exactly at the
    attained values of |f|, and the supremum is the largest of the left
    limits v * mu(|f| >= v)**(1/p) over attained values v > 0.
    """
    p = Fraction(p)
    if p <= 0:
        raise ValueError("weak-lp exponent must be positive")
    counts: dict = {}
    for v in f.values:
        v = abs(Fraction(v))
        counts[v] = counts.get(v, 0) + 1
    levels = sorted(counts, reverse=True)
    inv = 1 / p
    exact_mode = inv.denominator == 1
    best_exact = Fraction(0)
    best_approx = mpmath.mpf(0)
    seen = 0
    with mpmath.workprec(PRECISION_BITS):
        for v in levels:
            seen += counts[v]
            if v == 0:
                continue
            mu = Fraction(seen, 1 << f.resolution)
            if exact_mode:
                cand = v * mu ** int(inv)
                if cand > best_exact:
                    best_exact = cand
            else:
                cand = to_mpf(v) * to_mpf(mu) ** to_mpf(inv)
                if cand > best_approx:
                    best_approx = cand
    if exact_mode:
        return QuasinormValue.from_exact(best_exact)
    return QuasinormValue.from_approx(best_approx)


def conditional_expectation(f: StepFunction, n: int) -> StepFunction:
    """Average over the depth-n intervals; constant on each I_n(x)."""
    if not 0 <= n <= f.resolution:
        raise ValueError(f"conditioning level {n} outside [0, {f.resolution}]")
    if n == f.resolution:
        return f
    step = 1 << n
    width = f.resolution - n
    averages = [_div_pow2(sum(f.values[r::step]), width) for r in range(step)]
    return StepFunction(f.resolution, tuple(averages[b & (step - 1)] for b in range(1 << f.resolution)))


def dyadic_convolve(f: StepFunction, g: StepFunction) -> StepFunction:
    """(f * g)(x) = integral of f(x + t) g(t) dmu(t), with + the group addition.

    Direct double summation; exact and commutative.  Spectral multiplication
    gives the same function (checked in the test suite) and is used by the
    transform-based operations for speed.
    """
    f, g = _common(f, g)
    size = 1 << f.resolution
    fv, gv = f.values, g.values
    out = []
    for x in range(size):
        acc = 0
        for t in range(size):
            gt = gv[t]
            if gt:
                acc += fv[x ^ t] * gt
        out.append(_div_pow2(acc, f.resolution))
    return StepFunction(f.resolution, tuple(out))


def dump_stepfn(f: StepFunction) -> str:
    """Serialize: line 1 ``M=<resolution>``, then one ``num/den`` line per cell."""
    lines = [f"M={f.resolution}"]
    for v in f.values:
        v = Fraction(v)
        lines.append(f"{v.numerator}/{v.denominator}")
    return "\n".join(lines) + "\n"


def load_stepfn(text: str) -> StepFunction:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("M="):
        raise ValueError("step function text must start with an 'M=<resolution>' line")
    resolution = int(lines[0][2:])
    body = lines[1:]
    if len(body) != (1 << resolution):
        raise ValueError(
            f"expected {1 << resolution} value lines for resolution {resolution}, got {len(body)}"
        )
    return StepFunction(resolution, tuple(Fraction(ln) for ln in body))
