"""Walsh system, transform, kernels, and the kernel estimates."""

import random
from fractions import Fraction

import pytest

from walshfejer.dyadic import DyadicPoint, block_decomposition, zero_interval
from walshfejer.stepfn import StepFunction, dyadic_convolve, integrate, lp_quasinorm
from walshfejer.walsh import (
    WalshSpectrum,
    conjugate_transform,
    default_kernel_resolution,
    dirichlet,
    dirichlet_shift_residual,
    fejer_closed_form,
    fejer_kernel,
    fejer_mean,
    fejer_mean_sweep,
    fwht,
    kernel_block_lower_bounds,
    kernel_block_proof_terms,
    kernel_decomposition_residual,
    kernel_tail_integral_ratio,
    partial_sum,
    rademacher,
    synthesize,
    walsh,
    walsh_signs,
)


def random_int_stepfn(rng: random.Random, M: int) -> StepFunction:
    return StepFunction(M, tuple(rng.randint(-9, 9) for _ in range(1 << M)))


def naive_coefficients(f: StepFunction) -> list:
    """Independent oracle: plain inner products against each Walsh function."""
    return [integrate(f * walsh(k, f.resolution)) for k in range(1 << f.resolution)]


class TestWalshSystem:
    def test_rademacher_values(self):
        assert rademacher(0, 1).values == (1, -1)
        assert rademacher(1, 2).values == (1, 1, -1, -1)
        assert integrate(rademacher(2, 5)) == 0
        with pytest.raises(ValueError):
            rademacher(2, 2)

    def test_walsh_values(self):
        assert walsh(0, 2) == StepFunction.constant(1, 2)
        assert walsh(3, 2).values == (1, -1, -1, 1)
        with pytest.raises(ValueError):
            walsh(4, 2)

    def test_walsh_is_product_of_rademachers(self):
        M = 4
        for n in range(1 << M):
            prod = StepFunction.constant(1, M)
            for k in range(M):
                if (n >> k) & 1:
                    prod = prod * rademacher(k, M)
            assert walsh(n, M) == prod

    def test_orthonormality(self):
        M = 4
        for a in range(16):
            for b in range(16):
                assert integrate(walsh(a, M) * walsh(b, M)) == (1 if a == b else 0)

    def test_sign_rows_match(self):
        for n in (0, 1, 5, 12):
            signs = walsh_signs(n, 4)
            assert tuple(int(s) for s in signs) == walsh(n, 4).values


class TestTransform:
    def test_single_walsh_spectrum(self):
        spec = fwht(walsh(5, 4))
        assert spec.coeffs == tuple(1 if k == 5 else 0 for k in range(16))

    def test_matches_naive_inner_products(self):
        rng = random.Random(1)
        for M in range(0, 7):
            f = StepFunction(
                M, tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(1 << M))
            )
            assert list(fwht(f).coeffs) == naive_coefficients(f)

    def test_round_trip(self):
        rng = random.Random(2)
        for _ in range(100):
            M = rng.randint(0, 10)
            f = random_int_stepfn(rng, M)
            spec = fwht(f)
            assert synthesize(spec) == f
            assert fwht(synthesize(spec)).coeffs == spec.coeffs

    def test_parseval(self):
        rng = random.Random(3)
        for _ in range(100):
            M = rng.randint(0, 10)
            f = random_int_stepfn(rng, M)
            spec = fwht(f)
            assert integrate(f * f) == sum(c * c for c in spec.coeffs)


class TestDirichlet:
    def test_first_kernel_constant(self):
        assert dirichlet(1, 1) == StepFunction.constant(1, 1)

    def test_power_block_structure(self):
        for n in range(0, 13):
            d = dirichlet(1 << n, n + 1)
            for b in range(1 << (n + 1)):
                expected = (1 << n) if b & ((1 << n) - 1) == 0 else 0
                assert d.values[b] == expected

    def test_small_cells(self):
        assert dirichlet(3, 2).values == (3, 1, 1, -1)

    def test_definition_sum_oracle(self):
        M = 4
        for n in range(1, 17):
            acc = StepFunction.zero(M)
            for k in range(n):
                acc = acc + walsh(k, M)
            assert dirichlet(n, M) == acc

    def test_spectrum_is_ones_below_index(self):
        spec = fwht(dirichlet(5, 3))
        assert spec.coeffs == (1, 1, 1, 1, 1, 0, 0, 0)

    def test_resolution_guard(self):
        with pytest.raises(ValueError):
            dirichlet(5, 2)


class TestFejerKernel:
    def test_first_kernel(self):
        assert fejer_kernel(1, 1) == StepFunction.constant(1, 1)

    def test_two_point_kernel(self):
        k2 = fejer_kernel(2)
        assert k2.value_at(DyadicPoint(2, 0)) == Fraction(3, 2)
        assert k2.value_at(DyadicPoint(2, 1)) == Fraction(1, 2)

    def test_definition_mean_oracle(self):
        for n in range(1, 20):
            M = default_kernel_resolution(n)
            acc = StepFunction.zero(M)
            for k in range(1, n + 1):
                acc = acc + dirichlet(k, M)
            assert fejer_kernel(n) == acc * Fraction(1, n)

    def test_closed_form_matches_direct_sum(self):
        for exponent in range(0, 13):
            assert fejer_closed_form(exponent) == fejer_kernel(1 << exponent, exponent + 1)

    def test_closed_form_case_values(self):
        k8 = fejer_closed_form(3, 5)
        center = DyadicPoint(5, 0)
        assert k8.value_at(center) == Fraction((1 << 3) + 1, 2)
        assert k8.value_at(DyadicPoint(5, 0b00010)) == 1  # on I_3(e_1)
        assert k8.value_at(DyadicPoint(5, 0b00110)) == 0  # two low bits set


class TestPartialSumsAndMeans:
    def test_zeroth_partial_sum(self):
        f = random_int_stepfn(random.Random(4), 3)
        assert partial_sum(f, 0).is_zero()

    def test_full_partial_sum_recovers(self):
        f = random_int_stepfn(random.Random(5), 4)
        assert partial_sum(f, 1 << 4) == f

    def test_partial_sum_is_dirichlet_convolution(self):
        rng = random.Random(6)
        f = random_int_stepfn(rng, 5)
        for n in range(1, 33):
            assert partial_sum(f, n) == dyadic_convolve(f, dirichlet(n, 5))

    def test_fejer_mean_definition_and_convolution(self):
        rng = random.Random(7)
        f = random_int_stepfn(rng, 4)
        for n in range(1, 17):
            acc = StepFunction.zero(4)
            for k in range(1, n + 1):
                acc = acc + partial_sum(f, k)
            by_definition = acc * Fraction(1, n)
            assert fejer_mean(f, n) == by_definition
            assert fejer_mean(f, n) == dyadic_convolve(f, fejer_kernel(n, 4))

    def test_mean_of_constant(self):
        c = StepFunction.constant(Fraction(5, 3), 3)
        for n in (1, 3, 8):
            assert fejer_mean(c, n) == c

    def test_first_mean_is_the_mean(self):
        f = random_int_stepfn(random.Random(8), 3)
        assert fejer_mean(f, 1) == StepFunction.constant(integrate(f), 3)

    def test_sweep_matches_direct_means(self):
        f = random_int_stepfn(random.Random(9), 3)
        for n, sigma in fejer_mean_sweep(f, 20):
            assert sigma == fejer_mean(f, n)

    def test_mean_beyond_resolution_saturates(self):
        f = random_int_stepfn(random.Random(10), 3)
        n = 50  # beyond 2**3: all partial sums equal f from index 8 on
        acc = StepFunction.zero(3)
        for k in range(1, n + 1):
            acc = acc + (f if k >= 8 else partial_sum(f, k))
        assert fejer_mean(f, n) == acc * Fraction(1, n)


class TestConjugateTransform:
    def test_zero_point_is_identity(self):
        f = random_int_stepfn(random.Random(11), 4)
        assert conjugate_transform(f, DyadicPoint(5, 0)) == f

    def test_involution(self):
        rng = random.Random(12)
        f = random_int_stepfn(rng, 4)
        for idx in (0b10101, 0b00011, 0b11111):
            t = DyadicPoint(5, idx)
            assert conjugate_transform(conjugate_transform(f, t), t) == f

    def test_single_walsh_function_changes_by_sign(self):
        for k in (0, 1, 5, 9):
            f = walsh(k, 4)
            g = conjugate_transform(f, DyadicPoint(5, 0b11010))
            assert g == f or g == -f


class TestKernelDecomposition:
    def test_power_of_two_trivial(self):
        for k in range(0, 8):
            assert kernel_decomposition_residual(1 << k).is_zero()

    def test_three_by_hand(self):
        # at the zero cell: 3 K_3 = 6 = w_2 K_1 + 2 K_2 + D_2 = 1 + 3 + 2
        res = kernel_decomposition_residual(3)
        assert res.is_zero()
        assert (fejer_kernel(3, 2) * 3).values[0] == 6

    def test_range_exhaustive(self):
        for n in range(1, 257):
            assert kernel_decomposition_residual(n).is_zero()


class TestDirichletShift:
    def test_small_cases(self):
        assert dirichlet_shift_residual(1, 1).is_zero()
        for m in range(1, 9):
            assert dirichlet_shift_residual((1 << m) - 1, m).is_zero()

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            dirichlet_shift_residual(2, 1)
        with pytest.raises(ValueError):
            dirichlet_shift_residual(0, 3)


class TestTailIntegralRatio:
    def oracle(self, n, depth, x):
        kernel = abs(fejer_kernel(n))
        ind = StepFunction.indicator(zero_interval(depth), kernel.resolution)
        return dyadic_convolve(kernel, ind).value_at(x.refine(kernel.resolution))

    def test_single_branch_exact(self):
        x = DyadicPoint(5, 0b00100)  # in I_4(e_2)
        got = kernel_tail_integral_ratio(17, 4, x)
        factor = Fraction(1 << 2, 1 << 4)
        assert got == self.oracle(17, 4, x) / factor

    def test_pair_branch_exact(self):
        x = DyadicPoint(5, 0b01011)  # low bits 011: I_2(e_0 + e_1)
        got = kernel_tail_integral_ratio(22, 3, x)
        factor = Fraction(1 << 1, 22 << 3)
        assert got == self.oracle(22, 3, x) / factor

    def test_nonnegative(self):
        assert kernel_tail_integral_ratio(9, 3, DyadicPoint(4, 0b0110)) >= 0

    def test_rejections(self):
        with pytest.raises(ValueError):
            kernel_tail_integral_ratio(8, 3, DyadicPoint(4, 1))  # n too small
        with pytest.raises(ValueError):
            kernel_tail_integral_ratio(22, 3, DyadicPoint(4, 0b1000))  # inside I_3


class TestBlockLowerBounds:
    def test_five_by_hand(self):
        records = kernel_block_lower_bounds(5)
        assert records[0].skipped  # block (0, 0) has no probe cell
        assert records[1].min_value == 3
        assert records[1].bound == Fraction(16, 16)
        assert records[1].passed

    def test_power_blocks(self):
        for k in range(1, 10):
            (rec,) = kernel_block_lower_bounds(1 << k)
            assert rec.bound == Fraction(1 << (2 * k), 16)
            assert rec.passed

    def test_exhaustive_small_range(self):
        for n in range(1, 513):
            for rec in kernel_block_lower_bounds(n):
                assert rec.skipped or rec.passed

    def test_proof_terms(self):
        terms = kernel_block_proof_terms(5, 2)
        assert terms.main == Fraction(1 << 4, 4)
        assert terms.passed
        for n in (20, 37, 100, 292, 1365):
            for i, (lo, _) in enumerate(block_decomposition(n).blocks, start=1):
                if lo >= 2:
                    assert kernel_block_proof_terms(n, i).passed

    def test_proof_terms_rejects_low_block(self):
        with pytest.raises(ValueError):
            kernel_block_proof_terms(5, 1)


class TestNormFacts:
    def test_fejer_l1_small(self):
        assert lp_quasinorm(fejer_kernel(1, 1), 1).exact == 1

    def test_dirichlet_sandwich_small(self):
        from walshfejer.dyadic import variation

        for n in range(1, 129):
            l1 = lp_quasinorm(dirichlet(n), 1).exact
            assert Fraction(variation(n), 8) <= l1 <= variation(n)

    def test_spectrum_type(self):
        spec = fwht(StepFunction.constant(1, 2))
        assert isinstance(spec, WalshSpectrum)
        assert spec.coeffs[0] == 1
