"""Exact Walsh-Paley analysis on the dyadic group.

Step functions with rational cell values carry the whole theory at finite
resolution: the fast Walsh-Hadamard transform, Dirichlet and Fejér
kernels and their identities, dyadic martingales with Hardy-space
quasinorms, and the summability experiments built on top of them.
"""

from .dyadic import (
    BitIndex,
    BlockDecomposition,
    DyadicInterval,
    DyadicPoint,
    bit_order,
    block_count,
    block_decomposition,
    complement_partition,
    is_probe_index,
    prefix_part,
    probe_cell,
    variation,
    zero_interval,
)
from .stepfn import (
    QuasinormValue,
    StepFunction,
    conditional_expectation,
    dump_stepfn,
    dyadic_convolve,
    integrate,
    load_stepfn,
    lp_power,
    lp_quasinorm,
    weak_lp_quasinorm,
)
from .walsh import (
    WalshSpectrum,
    conjugate_transform,
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
)
from .hardy import (
    DyadicMartingale,
    LacunarySpec,
    PAtom,
    PhiFunction,
    atomic_martingale,
    averaged_maximal_function,
    build_block_martingale,
    build_lacunary_martingale,
    default_lacunary_spec,
    fejer_mean_shift_residual,
    haar_atom,
    hp_quasinorm,
    lacunary_atom,
    maximal_function,
    parse_lacunary_spec,
    validate_atom,
)

__all__ = [name for name in dir() if not name.startswith("_")]
