"""Quantitative experiments with deterministic CSV reports.

Each experiment returns an ExperimentReport: an echo of its parameters, a
small table of rows, a list of named pass/fail assertions with the values
they compared, and summary statistics.  Reports are bitwise deterministic
for fixed parameters and serialize to CSV (UTF-8, LF, ``#``-prefixed
metadata lines before the header); rational values round-trip losslessly.

Two arithmetic lanes exist.  Exact mode keeps all step-function values
rational and evaluates fractional powers with mpmath; float mode runs the
sweeps in float64 for larger resolutions.  Resolution caps are enforced
per lane and exceeding them is an error, never a silent downgrade.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from importlib.metadata import PackageNotFoundError, version

import mpmath
import numpy as np

from .dyadic import (
    bit_order,
    block_decomposition,
    complement_partition,
    probe_cell,
    variation,
)
from .hardy import (
    DyadicMartingale,
    LacunarySpec,
    default_lacunary_spec,
    build_block_martingale,
    build_lacunary_martingale,
    fejer_mean_shift_residual,
    haar_atom,
    hp_quasinorm,
    maximal_function,
)
from .stepfn import (
    PRECISION_BITS,
    StepFunction,
    dump_stepfn,
    lp_power,
    weak_lp_quasinorm,
)
from .walsh import (
    kernel_block_lower_bounds,
    kernel_block_proof_terms,
    scaled_fejer_values,
    walsh_signs,
)

EXACT_RESOLUTION_CAP = 17
FLOAT_RESOLUTION_CAP = 24
VARIATION_N_CAP = 1 << 24
KERNEL_SCAN_N_CAP = 1 << 16
BLOCK_EXPONENT_CAP = 12

KERNEL_L1_CEILING = Fraction(3)       # observed sup is ~1.1331 at n = 10922
TAIL_RATIO_CEILING = Fraction(1)      # observed max tail ratio is 1/2
QUOTED_VARIATION_CONSTANT = 1 / (4 * math.log(2))


try:
    ARTIFACT = f"walsh-fejer {version('walsh-fejer')}"
except PackageNotFoundError:
    ARTIFACT = "walsh-fejer unpackaged"


class ParameterError(ValueError):
    """Invalid or out-of-cap experiment parameters (usage error, exit code 2)."""


def _check_resolution(resolution: int, mode: str) -> None:
    cap = EXACT_RESOLUTION_CAP if mode == "exact" else FLOAT_RESOLUTION_CAP
    if resolution > cap:
        raise ParameterError(
            f"resolution {resolution} exceeds the {mode}-mode cap of {cap}"
        )


def _check_mode(mode: str) -> None:
    if mode not in ("exact", "float"):
        raise ParameterError(f"mode must be 'exact' or 'float', got {mode!r}")


@dataclass(frozen=True)
class Assertion:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ExperimentReport:
    experiment: str
    mode: str
    artifact: str = ARTIFACT
    params: dict = field(default_factory=dict)
    columns: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    assertions: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    stepfn: str | None = None

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    def check(self, name: str, passed: bool, detail: str = "") -> None:
        self.assertions.append(Assertion(name, bool(passed), detail))

    def to_csv(self) -> str:
        lines = ["# walsh-fejer-report v1"]
        lines.append(f"# artifact={self.artifact}")
        lines.append(f"# experiment={self.experiment}")
        lines.append(f"# mode={self.mode}")
        for key, value in self.params.items():
            lines.append(f"# param {key}={value}")
        for key, value in self.summary.items():
            lines.append(f"# summary {key}={value}")
        for a in self.assertions:
            lines.append(
                f"# assert name={a.name} pass={'true' if a.passed else 'false'} detail={a.detail}"
            )
        lines.append(",".join(self.columns))
        for row in self.rows:
            lines.append(",".join(_format_cell(c) for c in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "ExperimentReport":
        report = cls(experiment="", mode="")
        header_seen = False
        for line in text.splitlines():
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("artifact="):
                    report.artifact = body[len("artifact="):]
                elif body.startswith("experiment="):
                    report.experiment = body[len("experiment="):]
                elif body.startswith("mode="):
                    report.mode = body[len("mode="):]
                elif body.startswith("param "):
                    key, _, value = body[len("param "):].partition("=")
                    report.params[key] = value
                elif body.startswith("summary "):
                    key, _, value = body[len("summary "):].partition("=")
                    report.summary[key] = value
                elif body.startswith("assert "):
                    m = re.match(r"name=(\S+) pass=(true|false) detail=(.*)", body[len("assert "):])
                    if not m:
                        raise ValueError(f"malformed assertion line: {line!r}")
                    report.assertions.append(
                        Assertion(m.group(1), m.group(2) == "true", m.group(3))
                    )
                continue
            if not header_seen:
                report.columns = line.split(",")
                header_seen = True
            else:
                report.rows.append([_parse_cell(c) for c in line.split(",")])
        return report


_INT_RE = re.compile(r"-?\d+$")
_FRACTION_RE = re.compile(r"-?\d+/\d+$")


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, mpmath.mpf):
        return repr(float(value))
    text = str(value)
    if "," in text or "\n" in text:
        raise ValueError(f"cell value may not contain separators: {text!r}")
    return text


def _parse_cell(text: str):
    if text == "true":
        return True
    if text == "false":
        return False
    if _INT_RE.match(text):
        return int(text)
    if _FRACTION_RE.match(text):
        return Fraction(text)
    try:
        return float(text)
    except ValueError:
        return text


def _nstr(x) -> str:
    return mpmath.nstr(x, 20)


def _sign_tables(resolution: int) -> np.ndarray:
    """signs[t] holds the values of w_{2**(t+1) - 1}: parity of the low t+1 bits."""
    size = 1 << resolution
    cells = np.arange(size, dtype=np.uint64)
    parity = np.zeros((resolution, size), dtype=np.int8)
    parity[0] = (cells & np.uint64(1)).astype(np.int8)
    for t in range(1, resolution):
        parity[t] = parity[t - 1] ^ ((cells >> np.uint64(t)) & np.uint64(1)).astype(np.int8)
    return 1 - 2 * parity.astype(np.int64)


def walsh_row_sweep(resolution: int, n_max: int):
    """Yield (n, values of w_{n-1}) for n = 1..n_max via incremental sign flips.

    Consecutive Walsh indices differ by a run of trailing ones, so each step
    multiplies by one precomputed parity row.  The yielded array is reused;
    callers must not mutate it.
    """
    signs = _sign_tables(resolution)
    w = np.ones(1 << resolution, dtype=np.int64)
    for n in range(1, n_max + 1):
        if n > 1:
            t = ((n - 1) ^ (n - 2)).bit_length() - 1
            w *= signs[t]
        yield n, w


def _sqrt_sum(arr: np.ndarray) -> mpmath.mpf:
    """Sum of sqrt of |entries| at working precision."""
    total = mpmath.mpf(0)
    for v in arr:
        iv = int(v)
        if iv:
            total += mpmath.sqrt(abs(iv))
    return total


def _abs_power_sum(values, p: Fraction, denominator: int) -> mpmath.mpf:
    """Sum over cells of |v / denominator| ** p at working precision."""
    pf = mpmath.mpf(p.numerator) / p.denominator
    total = mpmath.mpf(0)
    for v in values:
        if v:
            q = abs(Fraction(v, denominator) if isinstance(v, int) else Fraction(v) / denominator)
            x = mpmath.mpf(q.numerator) / q.denominator
            if p == Fraction(1, 2):
                total += mpmath.sqrt(x)
            elif p == Fraction(1, 4):
                total += mpmath.sqrt(mpmath.sqrt(x))
            else:
                total += x**pf
    return total


# ---------------------------------------------------------------------------
# strong-sum: weighted strong sums of Fejér means over atoms stay bounded


def run_strong_sum(
    p: Fraction,
    n_max: int = 1 << 12,
    depth: int = 4,
    source: StepFunction | None = None,
    mode: str = "exact",
    log_base: str = "2",
) -> ExperimentReport:
    """Accumulate sum over m of ||sigma_m f||_p^p / m^(2-2p), log-normalized.

    The normalization divides by log n only when floor(1/2 + p) is 1, i.e.
    at p = 1/2.  The primary column uses the plain L_p quasinorm to the
    p-th power; the secondary column repeats the sum with the Hardy
    quasinorm of the Fejér mean (via maximal functions).  The summary
    records the supremum, where it was attained, and two plateau measures.
    """
    p = Fraction(p)
    _check_mode(mode)
    if not 0 < p <= Fraction(1, 2):
        raise ParameterError(f"exponent p must lie in (0, 1/2], got {p}")
    if n_max < 4:
        raise ParameterError("n_max must be at least 4")
    if log_base not in ("2", "e"):
        raise ParameterError("log base must be '2' or 'e'")
    if source is None:
        atom = haar_atom(depth, p)
        fn = atom.fn
        canonical = True
    else:
        fn = source
        depth = None
        canonical = False
    _check_resolution(fn.resolution, mode)

    report = ExperimentReport(
        experiment="strong-sum",
        mode=mode,
        params={
            "p": str(p),
            "n_max": str(n_max),
            "depth": str(depth) if canonical else "custom",
            "log_base": log_base,
        },
    )
    log_power = int(Fraction(1, 2) + p)  # 0 below p = 1/2, 1 at p = 1/2

    def log_factor(n: int) -> float:
        return math.log2(n) if log_base == "2" else math.log(n)

    size = 1 << fn.resolution
    row_points = {1 << k for k in range(n_max.bit_length() + 1)} | {n_max}
    hp_source_p = lp_power(maximal_function(DyadicMartingale(fn)), p)

    with mpmath.workprec(PRECISION_BITS):
        if mode == "float":
            coeffs = _float_transform(np.array([float(v) for v in fn.values]))
            partial = np.zeros(size)
            acc = np.zeros(size)
        else:
            coeffs = _exact_scaled_coeffs(fn)
            partial = [0] * size
            acc = [0] * size
        run_primary = mpmath.mpf(0)
        run_hp = mpmath.mpf(0)
        sup = mpmath.mpf(0)
        sup_at = 0
        sup_q3 = mpmath.mpf(0)  # sup over n <= 3 * n_max / 4
        sup_mid = mpmath.mpf(0)  # sup over n <= n_max / 4
        q3_cut = (3 * n_max) // 4
        mid_cut = n_max // 4
        onset = None
        rows = []
        for n in range(1, n_max + 1):
            if n - 1 < size and coeffs[n - 1]:
                signs = walsh_signs(n - 1, fn.resolution)
                c = coeffs[n - 1]
                if mode == "float":
                    partial += c * signs.astype(np.float64) / size
                else:
                    scaled = Fraction(c, size) if isinstance(c, int) else Fraction(c) / size
                    for b in range(size):
                        partial[b] += scaled if signs[b] > 0 else -scaled
            if mode == "float":
                acc += partial
                sigma_abs = np.abs(acc / n)
                norm_p = float((sigma_abs ** float(p)).mean())
                hp_p = float((_float_maximal(acc / n, fn.resolution) ** float(p)).mean())
                is_zero = bool(np.all(acc == 0.0))
            else:
                for b in range(size):
                    acc[b] += partial[b]
                norm_p = _abs_power_sum(acc, p, n) / size
                sig = StepFunction(
                    fn.resolution,
                    tuple(Fraction(v, n) if isinstance(v, int) else Fraction(v) / n for v in acc),
                )
                hp_p = lp_power(maximal_function(DyadicMartingale(sig)), p).approx
                is_zero = all(v == 0 for v in acc)
            if onset is None and not is_zero:
                onset = n
            weight = mpmath.mpf(n) ** (2 - 2 * float(p))
            run_primary += norm_p / weight
            run_hp += hp_p / weight
            if log_power == 0:
                w_primary, w_hp = run_primary, run_hp
            elif n == 1:
                w_primary = w_hp = mpmath.mpf(0)
            else:
                w_primary = run_primary / log_factor(n)
                w_hp = run_hp / log_factor(n)
            if w_primary > sup:
                sup, sup_at = +w_primary, n
            if n <= q3_cut and w_primary > sup_q3:
                sup_q3 = +w_primary
            if n <= mid_cut and w_primary > sup_mid:
                sup_mid = +w_primary
            if n in row_points:
                rows.append([n, float(w_primary), float(w_hp), float(sup)])

        report.columns = ["n", "weighted_sum", "weighted_sum_hardy", "running_sup"]
        report.rows = rows
        plateau = float((sup - sup_q3) / sup) if sup > 0 else 0.0
        late_growth = float((sup - sup_mid) / sup) if sup > 0 else 0.0
        report.summary = {
            "sup": _nstr(sup),
            "sup_at": str(sup_at),
            "hp_norm_source_p": str(hp_source_p),
            "sup_over_hp": _nstr(sup / hp_source_p.approx) if sup > 0 else "0",
            "onset": str(onset),
            "last_quarter_increase": repr(plateau),
            "increase_after_quarter_point": repr(late_growth),
        }
        if canonical:
            expected_onset = (1 << depth) + 1
            report.check(
                "fejer_means_vanish_through_block_start",
                onset == expected_onset,
                f"first nonzero Fejér mean at n={onset}, expected {expected_onset}",
            )
        report.check(
            "weighted_sum_plateau",
            plateau <= 0.01,
            f"relative increase of the sup over the last quarter = {plateau!r} (threshold 0.01)",
        )
        report.stepfn = dump_stepfn(fn)
    return report


def _exact_scaled_coeffs(fn: StepFunction) -> list:
    """2**M times the Walsh coefficients, as exact ints/Fractions."""
    from .walsh import _hadamard

    return _hadamard(list(fn.values))


def _float_transform(values: np.ndarray) -> np.ndarray:
    out = values.copy()
    h = 1
    n = out.size
    while h < n:
        b = out.reshape(-1, 2, h)
        top = b[:, 0, :].copy()
        b[:, 0, :] = top + b[:, 1, :]
        b[:, 1, :] = top - b[:, 1, :]
        h *= 2
    return out


def _float_maximal(values: np.ndarray, resolution: int) -> np.ndarray:
    best = np.abs(values.copy())
    cur = values.copy()
    for n in range(resolution - 1, -1, -1):
        cur = cur.reshape(-1, 2, 1 << n)
        mean = (cur[:, 0, :] + cur[:, 1, :]) / 2.0
        cur = np.repeat(mean[:, None, :], 2, axis=1).reshape(-1)
        np.maximum(best, np.abs(cur), out=best)
    return best


# ---------------------------------------------------------------------------
# weak-divergence: weighted weak-norm sums of the lacunary martingale grow


def run_weak_divergence(
    spec: LacunarySpec | None = None,
    k_max: int | None = None,
    mode: str = "exact",
) -> ExperimentReport:
    """Partial sums of ||sigma_n F||_{p,inf}^p / Phi(n) over probe-index blocks.

    Within each coefficient block (2**o_k, 2**(o_k+1)) only indices n with
    n = 5 mod 8 contribute; there the Fejér mean is pinned down on the probe
    cell I_2(e_0 + e_1) and the block adds a positive amount, so the partial
    sums must strictly increase with k.
    """
    _check_mode(mode)
    if spec is None:
        spec = default_lacunary_spec()
    if k_max is not None:
        if k_max < 1:
            raise ParameterError("k_max must be >= 1")
        spec = LacunarySpec.create(
            spec.p, spec.phi, spec.alphas[:k_max], resolution=spec.resolution
        )
    if not 0 < spec.p < Fraction(1, 2):
        raise ParameterError(f"exponent p must lie strictly inside (0, 1/2), got {spec.p}")
    _check_resolution(spec.resolution, mode)

    report = ExperimentReport(
        experiment="weak-divergence",
        mode=mode,
        params={
            "p": str(spec.p),
            "phi": spec.phi.name,
            "alpha": ",".join(str(a) for a in spec.alphas),
            "resolution": str(spec.resolution),
        },
    )
    mart = build_lacunary_martingale(spec)
    fn = mart.terminal
    p = spec.p
    resolution = spec.resolution
    size = 1 << resolution
    cell_idx = list(probe_cell().cell_indices(resolution))

    with mpmath.workprec(PRECISION_BITS):
        partial = mpmath.mpf(0)
        partials = []
        rows = []
        bound_ok = True
        bound_detail = ""
        floor_constant = None  # empirical constant of the weak-norm lower bound
        if mode == "float":
            base = _float_transform(np.array([float(v) for v in fn.values])) / size
        else:
            base = _exact_scaled_coeffs(fn)
        for k, o in enumerate(spec.orders):
            block = [n for n in range((1 << o) + 1, 1 << (o + 1)) if n % 8 == 5]
            height = spec.coefficient_height(k)
            lower = height / (1 << (o + 1))  # per-index floor on the probe cell
            weak_floor = mpmath.sqrt(spec.phi.weight(1 << (o + 1))) / mpmath.mpf(2) ** (
                float(p) * (o + 1)
            )
            block_sum = mpmath.mpf(0)
            for n in block:
                if mode == "float":
                    coeffs = base.copy()
                    js = np.arange(size)
                    coeffs[js >= n] = 0.0
                    coeffs[js < n] *= (n - js[js < n]) / n
                    sigma = _float_transform(coeffs)
                    wk = _float_weak_power(sigma, p)
                    cell_min = min(abs(sigma[b]) for b in cell_idx)
                    if cell_min < float(lower) * (1 - 1e-9):
                        bound_ok = False
                        bound_detail = f"n={n}: min {cell_min} < {float(lower)}"
                else:
                    sigma = _sigma_from_scaled(base, n, resolution)
                    cell_min = min(abs(sigma.values[b]) for b in cell_idx)
                    if cell_min < lower:
                        bound_ok = False
                        bound_detail = f"n={n}: min {cell_min} < {lower}"
                    wk = weak_lp_quasinorm(sigma, p).pow(p).approx
                ratio = wk / weak_floor
                if floor_constant is None or ratio < floor_constant:
                    floor_constant = +ratio
                block_sum += wk / spec.phi.weight(n)
            partial += block_sum
            partials.append(+partial)
            growth = float(partials[-1] / partials[-2]) if k > 0 else float("nan")
            rows.append(
                [k, o, len(block), float(block_sum), float(partial), growth]
            )
        report.columns = ["k", "order", "block_indices", "block_sum", "partial_sum", "growth"]
        report.rows = rows
        increasing = all(b > a for a, b in zip(partials, partials[1:]))
        report.summary = {
            "partial_sums": ";".join(_nstr(v) for v in partials),
            "min_growth": _nstr(min((b / a for a, b in zip(partials, partials[1:])), default=mpmath.mpf(0))),
            "weak_norm_floor_constant": _nstr(floor_constant),
            "summability_surrogate": _nstr(spec.summability_surrogate()),
            "hp_norm_p": str(hp_quasinorm(mart, p).pow(p)),
        }
        report.check(
            "partial_sums_strictly_increasing",
            increasing and partials[0] > 0,
            f"partials: {report.summary['partial_sums']}",
        )
        report.check(
            "probe_cell_lower_bound",
            bound_ok,
            bound_detail or "min |sigma_n F| >= Phi(2**(o+1))**(1/2p) / 2**(o+1) on every block index",
        )
        report.stepfn = dump_stepfn(fn)
    return report


def _sigma_from_scaled(scaled_coeffs: list, n: int, resolution: int) -> StepFunction:
    """sigma_n from 2**M-scaled coefficients, exactly."""
    from .walsh import _hadamard

    size = 1 << resolution
    shifted = [
        (scaled_coeffs[j] * Fraction(n - j, n * size)) if j < n and scaled_coeffs[j] else Fraction(0)
        for j in range(size)
    ]
    return StepFunction(resolution, tuple(_hadamard(shifted)))


def _float_weak_power(values: np.ndarray, p: Fraction) -> float:
    """(sup_v v * mu(|f| >= v)**(1/p))**p for a float-valued step function."""
    v = np.sort(np.abs(values))[::-1]
    mu = np.arange(1, v.size + 1) / v.size
    cands = v * mu ** (1 / float(p))
    return float(cands.max() ** float(p))


# ---------------------------------------------------------------------------
# average-divergence: Cesàro averages of L_{1/2} Fejér quasinorms blow up


def run_average_divergence(
    m_min: int = 4, m_max: int = 10, mode: str = "exact"
) -> ExperimentReport:
    """Block averages B_m of ||sigma_k F_m||_{1/2}^{1/2} over k in (2**m, 2**(m+1)).

    F_m is the single-block martingale of unit Hardy H_{1/2} quasinorm; the
    averages grow with m because past the block start the Fejér mean reduces
    to a rescaled shifted kernel whose square-root integral tracks the
    binary variation of the shift.
    """
    _check_mode(mode)
    if not 1 <= m_min <= m_max:
        raise ParameterError("need 1 <= m_min <= m_max")
    if m_max > BLOCK_EXPONENT_CAP:
        raise ParameterError(f"m_max exceeds the cost guard {BLOCK_EXPONENT_CAP}")
    _check_resolution(m_max + 1, mode)

    report = ExperimentReport(
        experiment="average-divergence",
        mode=mode,
        params={"m_min": str(m_min), "m_max": str(m_max)},
    )
    rows = []
    b_values = []
    chain_min = None
    chain_at = None
    with mpmath.workprec(PRECISION_BITS):
        for m in range(m_min, m_max + 1):
            resolution = m + 1
            size = 1 << resolution
            start = 1 << m
            partial = np.zeros(size, dtype=np.int64)
            acc = np.zeros(size, dtype=np.int64)
            total = mpmath.mpf(0)
            m_chain_min = None
            w = walsh_signs(start, resolution)
            signs = _sign_tables(resolution)
            for k in range(start + 1, 2 * start):
                j = k - 1
                if j > start:
                    t = (j ^ (j - 1)).bit_length() - 1
                    w = w * signs[t]
                partial = partial + start * w
                acc = acc + partial
                if mode == "float":
                    val = mpmath.mpf(
                        float(np.sqrt(np.abs(acc).astype(np.float64)).sum())
                        / math.sqrt(k)
                        / size
                    )
                else:
                    val = _sqrt_sum(acc) / mpmath.sqrt(k) / size
                total += val
                ratio = val / variation(k - start)
                if m_chain_min is None or ratio < m_chain_min:
                    m_chain_min = +ratio
                if chain_min is None or ratio < chain_min:
                    chain_min, chain_at = +ratio, (m, k - start)
            b_m = total / (2 * start)
            b_values.append(+b_m)
            rows.append([m, float(b_m), float(m_chain_min)])
        report.columns = ["m", "B_m", "min_sqrt_integral_over_variation"]
        report.rows = rows
        increasing = all(b > a for a, b in zip(b_values, b_values[1:]))
        report.summary = {
            "B_values": ";".join(_nstr(v) for v in b_values),
            "B_ratio": _nstr(b_values[-1] / b_values[0]) if b_values[0] > 0 else "inf",
            "chain_constant": _nstr(chain_min),
            "chain_constant_at": f"m={chain_at[0]} shift={chain_at[1]}",
        }
        report.check(
            "block_averages_strictly_increasing",
            increasing,
            f"B values: {report.summary['B_values']}",
        )
        report.check(
            "sqrt_integral_dominates_variation",
            chain_min is not None and chain_min > 0,
            f"min ratio {report.summary['chain_constant']} at {report.summary['chain_constant_at']}",
        )
        report.stepfn = dump_stepfn(build_block_martingale(m_max).terminal)
    return report


# ---------------------------------------------------------------------------
# variation-average: running averages of the binary variation


def run_variation_average(n_max: int = 1 << 20, mode: str = "exact") -> ExperimentReport:
    """Cumulative sums of the binary variation and their log-normalized ratios.

    Reports the ratio sum/(n log n) under both log conventions and for both
    the variation and the block count, flags which one lands closest to the
    classical constant 1/(4 ln 2), and checks the closed form
    sum_{k < 2**m} V(k) = (m+1) 2**(m-1) against brute force.
    """
    _check_mode(mode)
    if not 8 <= n_max <= VARIATION_N_CAP:
        raise ParameterError(f"n_max must lie in [8, {VARIATION_N_CAP}]")
    report = ExperimentReport(
        experiment="variation-average",
        mode=mode,
        params={"n_max": str(n_max)},
    )

    def batch_sums(lo: int, hi: int) -> tuple[int, int]:
        arr = np.arange(lo, hi, dtype=np.uint64)
        v = int(np.bitwise_count(arr ^ (arr << np.uint64(1))).sum())
        s = int(np.bitwise_count(arr & ~(arr << np.uint64(1))).sum())
        return v, s

    rows = []
    ratios = {}
    total_v = 0
    total_s = 0
    prev = 1
    checkpoints = [1 << k for k in range(3, n_max.bit_length())]
    if checkpoints[-1] != n_max:
        checkpoints.append(n_max)
    for n in checkpoints:
        dv, ds = batch_sums(prev, n + 1)
        total_v += dv
        total_s += ds
        prev = n + 1
        r = {
            "variation_natural": total_v / (n * math.log(n)),
            "variation_log2": total_v / (n * math.log2(n)),
            "blocks_natural": total_s / (n * math.log(n)),
            "blocks_log2": total_s / (n * math.log2(n)),
        }
        ratios[n] = r
        rows.append(
            [n, total_v, total_s, r["variation_natural"], r["variation_log2"],
             r["blocks_natural"], r["blocks_log2"]]
        )
    report.columns = [
        "n", "variation_sum", "block_sum",
        "ratio_variation_natural", "ratio_variation_log2",
        "ratio_blocks_natural", "ratio_blocks_log2",
    ]
    report.rows = rows

    closed_ok = True
    closed_detail = ""
    for m in range(1, 21):
        top = 1 << m
        brute = int(
            np.bitwise_count(
                np.arange(top, dtype=np.uint64) ^ (np.arange(top, dtype=np.uint64) << np.uint64(1))
            ).sum()
        )
        closed = (m + 1) * (1 << (m - 1))
        if brute != closed:
            closed_ok = False
            closed_detail = f"m={m}: brute {brute} != closed {closed}"
            break
    report.check(
        "variation_sum_closed_form",
        closed_ok,
        closed_detail or "sum_{k<2**m} V(k) == (m+1) 2**(m-1) for m <= 20, exact",
    )

    final = ratios[checkpoints[-1]]
    distances = {
        name: abs(value - QUOTED_VARIATION_CONSTANT) / QUOTED_VARIATION_CONSTANT
        for name, value in final.items()
    }
    closest = min(distances, key=distances.get)
    report.summary = {
        "quoted_constant": repr(QUOTED_VARIATION_CONSTANT),
        "closest_convention": closest,
        "closest_relative_distance": repr(distances[closest]),
    }
    for name, value in final.items():
        report.summary[f"final_{name}"] = repr(value)

    if n_max >= (1 << 20):
        a, b = ratios[1 << 18], ratios[1 << 20]
        worst = max(abs(b[k] - a[k]) / b[k] for k in a)
        report.check(
            "ratio_stabilization",
            worst <= 0.02,
            f"max relative drift of the four ratios between n=2**18 and n=2**20 is {worst!r}",
        )
    return report


# ---------------------------------------------------------------------------
# kernel-scans: norm sups, the L1 sandwich, and the kernel estimates


def run_kernel_scans(n_max: int = 1 << 14, mode: str = "exact") -> list[ExperimentReport]:
    """Four kernel scans, each with its own report (and CSV when dumped).

    Covers the L1 boundedness of the Fejér kernels, the variation sandwich
    for Dirichlet L1 norms, the tail-integral ratios over the complement
    partition, the per-block kernel lower bounds with their proof-chain
    terms, and the decay of Fejér means of an atom off its support.
    """
    _check_mode(mode)
    if not 16 <= n_max <= KERNEL_SCAN_N_CAP:
        raise ParameterError(f"n_max must lie in [16, {KERNEL_SCAN_N_CAP}]")
    return [
        _scan_kernel_l1(n_max, mode),
        _scan_dirichlet_sandwich(min(n_max, 1 << 12), mode),
        _scan_tail_ratios(mode),
        _scan_block_bounds(min(n_max, 2048), mode),
        _scan_atom_tail(mode),
    ]


def _scan_kernel_l1(n_max: int, mode: str) -> ExperimentReport:
    report = ExperimentReport(
        experiment="kernel-l1", mode=mode, params={"n_max": str(n_max)}
    )
    resolution = bit_order(n_max) + 1
    size = 1 << resolution
    dirich = np.zeros(size, dtype=np.int64)
    acc = np.zeros(size, dtype=np.int64)
    best = Fraction(0)
    best_at = 0
    rows = []
    row_points = {1 << k for k in range(n_max.bit_length() + 1)} | {n_max}
    for n, w in walsh_row_sweep(resolution, n_max):
        dirich += w
        acc += dirich
        value = Fraction(int(np.abs(acc).sum()), n << resolution)
        if value > best:
            best, best_at = value, n
            rows.append([n, value, True])
        elif n in row_points:
            rows.append([n, value, False])
    report.columns = ["n", "fejer_l1", "new_sup"]
    report.rows = rows
    report.summary = {
        "sup": f"{best.numerator}/{best.denominator}",
        "sup_float": repr(float(best)),
        "sup_at": str(best_at),
    }
    report.check(
        "fejer_l1_bounded",
        best <= KERNEL_L1_CEILING,
        f"sup {float(best)!r} at n={best_at}, recorded ceiling {KERNEL_L1_CEILING}",
    )
    return report


def _scan_dirichlet_sandwich(n_max: int, mode: str) -> ExperimentReport:
    report = ExperimentReport(
        experiment="dirichlet-sandwich", mode=mode, params={"n_max": str(n_max)}
    )
    resolution = bit_order(n_max) + 1
    dirich = np.zeros(1 << resolution, dtype=np.int64)
    all_ok = True
    detail = ""
    lo_ratio, hi_ratio = Fraction(10), Fraction(0)
    rows = []
    row_points = {1 << k for k in range(n_max.bit_length() + 1)} | {n_max}
    for n, w in walsh_row_sweep(resolution, n_max):
        dirich += w
        l1 = Fraction(int(np.abs(dirich).sum()), 1 << resolution)
        v = variation(n)
        ok = Fraction(v, 8) <= l1 <= v
        if not ok and all_ok:
            all_ok = False
            detail = f"first violation at n={n}: l1={l1}, V={v}"
        ratio = l1 / v
        extreme = False
        if ratio < lo_ratio:
            lo_ratio, extreme = ratio, True
        if ratio > hi_ratio:
            hi_ratio, extreme = ratio, True
        if extreme or n in row_points:
            rows.append([n, l1, v, ratio, ok])
    report.columns = ["n", "dirichlet_l1", "variation", "ratio", "within_sandwich"]
    report.rows = rows
    report.summary = {
        "min_ratio": f"{lo_ratio.numerator}/{lo_ratio.denominator}",
        "max_ratio": f"{hi_ratio.numerator}/{hi_ratio.denominator}",
    }
    report.check(
        "variation_sandwich",
        all_ok,
        detail or f"V/8 <= ||D_n||_1 <= V for all n <= {n_max}, exact",
    )
    return report


def _scan_tail_ratios(mode: str) -> ExperimentReport:
    report = ExperimentReport(
        experiment="kernel-tail", mode=mode, params={"depth_max": "6", "span_octaves": "3"}
    )
    overall = Fraction(0)
    overall_at = ""
    rows = []
    for depth in range(1, 7):
        branch_max = {"pair": Fraction(0), "single": Fraction(0)}
        for n in range((1 << depth) + 1, (1 << (depth + 3)) + 1):
            resolution = max(bit_order(n) + 1, depth)
            sums = np.abs(scaled_fejer_values(n, resolution)).reshape(-1, 1 << depth).sum(
                axis=0, dtype=np.int64
            )
            for piece in complement_partition(depth):
                worst = max(int(sums[lo]) for lo in piece.cell_indices(depth))
                lhs = Fraction(worst, n << resolution)
                anchor = piece.anchor_index
                if piece.depth == depth and anchor.bit_count() == 1:
                    branch = "single"
                    k = anchor.bit_length() - 1
                    factor = Fraction(1 << k, 1 << depth)
                else:
                    branch = "pair"
                    k = (anchor & -anchor).bit_length() - 1
                    l = piece.depth - 1
                    factor = Fraction(1 << (l + k), n << depth)
                ratio = lhs / factor
                if ratio > branch_max[branch]:
                    branch_max[branch] = ratio
                if ratio > overall:
                    overall = ratio
                    overall_at = f"depth={depth} n={n} branch={branch}"
        rows.append([depth, branch_max["pair"], branch_max["single"]])
    report.columns = ["depth", "max_ratio_pair_branch", "max_ratio_single_branch"]
    report.rows = rows
    report.summary = {
        "max_ratio": f"{overall.numerator}/{overall.denominator}",
        "max_ratio_at": overall_at,
    }
    report.check(
        "tail_ratio_bounded",
        overall <= TAIL_RATIO_CEILING,
        f"max ratio {float(overall)!r} at {overall_at}, recorded ceiling {TAIL_RATIO_CEILING}",
    )
    return report


def _scan_block_bounds(n_max: int, mode: str) -> ExperimentReport:
    report = ExperimentReport(
        experiment="kernel-blocks", mode=mode, params={"n_max": str(n_max)}
    )
    all_ok = True
    detail = ""
    skipped = 0
    checked = 0
    worst_margin = None
    rows = []
    for n in range(1, n_max + 1):
        for rec in kernel_block_lower_bounds(n):
            if rec.skipped:
                skipped += 1
                continue
            checked += 1
            margin = rec.min_value / rec.bound
            if worst_margin is None or margin < worst_margin[0]:
                worst_margin = (margin, n, rec.block_index)
                rows.append([n, rec.block_index, rec.low_bit, rec.min_value, rec.bound, rec.passed])
            if not rec.passed and all_ok:
                all_ok = False
                detail = f"first failure at n={n}, block {rec.block_index}"
    report.columns = ["n", "block", "low_bit", "min_scaled_kernel", "bound", "passed"]
    report.rows = rows
    proof_ok = True
    proof_detail = ""
    samples = [5, 20, 37, 100, 292, 511, 1365, 2048, 2730, 3640, 4095]
    for n in samples:
        if n > n_max:
            continue
        for i, (lo, _) in enumerate(block_decomposition(n).blocks, start=1):
            if lo >= 2:
                terms = kernel_block_proof_terms(n, i)
                if not terms.passed:
                    proof_ok = False
                    proof_detail = f"n={n} block {i}"
    report.summary = {
        "checked_blocks": str(checked),
        "skipped_low_bit_zero": str(skipped),
        "worst_margin": _nstr(mpmath.mpf(worst_margin[0].numerator) / worst_margin[0].denominator),
        "worst_margin_at": f"n={worst_margin[1]} block={worst_margin[2]}",
    }
    report.check(
        "block_lower_bounds",
        all_ok,
        detail or f"min n|K_n| >= 2**(2l)/16 on every probe cell, n <= {n_max}",
    )
    report.check(
        "proof_chain_terms",
        proof_ok,
        proof_detail or "main/second/third terms within their stated bounds on sampled n",
    )
    return report


def _scan_atom_tail(mode: str) -> ExperimentReport:
    depth = 4
    n_max = 1 << 10
    report = ExperimentReport(
        experiment="atom-tail",
        mode=mode,
        params={"depth": str(depth), "n_max": str(n_max)},
    )
    rows = []
    summary = {}
    row_points = {1 << k for k in range(5, 11)}
    with mpmath.workprec(PRECISION_BITS):
        for p in (Fraction(1, 4), Fraction(1, 2)):
            atom = haar_atom(depth, p)
            size = 1 << atom.fn.resolution
            outside = [b for b in range(size) if b & ((1 << depth) - 1)]
            coeffs = _exact_scaled_coeffs(atom.fn)
            partial = [0] * size
            acc = [0] * size
            log_pow = int(Fraction(1, 2) + p)
            fitted = mpmath.mpf(0)
            fitted_at = 0
            for m in range(1, n_max + 1):
                if m - 1 < size and coeffs[m - 1]:
                    signs = walsh_signs(m - 1, atom.fn.resolution)
                    scaled = Fraction(coeffs[m - 1], size)
                    for b in range(size):
                        partial[b] += scaled if signs[b] > 0 else -scaled
                for b in range(size):
                    acc[b] += partial[b]
                if m <= (1 << depth):
                    continue
                tail = _abs_power_sum([acc[b] for b in outside], p, m) / size
                shape = (
                    mpmath.mpf(2) ** (depth * (1 - float(p)))
                    * depth**log_pow
                    / mpmath.mpf(m) ** float(p)
                    + 1
                )
                ratio = tail / shape
                if ratio > fitted:
                    fitted, fitted_at = +ratio, m
                if m in row_points:
                    rows.append([str(p), m, float(tail), float(ratio)])
            summary[f"fitted_constant_p={p}"] = _nstr(fitted)
            summary[f"fitted_at_p={p}"] = str(fitted_at)
    report.columns = ["p", "m", "tail_power_integral", "ratio_to_shape"]
    report.rows = rows
    report.summary = summary
    report.check(
        "tail_constants_recorded",
        all(float(v) > 0 for k, v in summary.items() if k.startswith("fitted_constant")),
        "; ".join(f"{k}={v}" for k, v in summary.items()),
    )
    return report


# ---------------------------------------------------------------------------
# exact residual sweeps used by the acceptance suite


def shift_residuals_all_zero(m_cap: int = 10) -> bool:
    """dirichlet_shift_residual vanishes for every m <= m_cap, j < 2**m."""
    from .walsh import dirichlet_shift_residual

    for m in range(1, m_cap + 1):
        for j in range(1, 1 << m):
            if not dirichlet_shift_residual(j, m).is_zero():
                return False
    return True


def mean_shift_residuals_all_zero(m_cap: int = 10) -> bool:
    """fejer_mean_shift_residual vanishes for every m <= m_cap, 0 < n < 2**m."""
    for m in range(1, m_cap + 1):
        for n in range(1, 1 << m):
            if not fejer_mean_shift_residual(m, n).is_zero():
                return False
    return True
