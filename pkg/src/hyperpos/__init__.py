"""Cayley hyperdeterminants, Schur expansions and hyperdeterminantal positivity."""
from .errors import (
    CapExceeded,
    DegenerateSpectrum,
    Divergent,
    DomainError,
    HyperposError,
    IndexOutOfRange,
    Infeasible,
    ParameterError,
    ShapeMismatch,
    TolBreach,
)
from .hyperdet import (
    HyperArray,
    Permutation,
    cayley_sum,
    expand_2222,
    hyperdet,
    hyperdet_naive,
    hyperdet_recursive,
    hyperdet_reduced,
    permutations,
    replace_slice,
    slice_scale,
    swap_slices,
    work_estimate,
)
from .identities import HTPReport, TruncatedSum, binet_cauchy_discrete, exp_schur_sum, htp_scan, pfq_schur_sum
from .kernels import EvaluationGrid, KernelSpec, classical_pfq, kernel_array, kernel_value, weyl_sample
from .matrixarg import (
    HermitianSpec,
    MCEstimate,
    extended_hc_check,
    extended_hc_pfq_check,
    extended_series,
    haar_unitary,
    hciz_check,
    mean_value_check,
    pfq_matrix,
)
from .symfun import (
    Partition,
    beta_n,
    exact_det,
    omega,
    partitional_rising,
    partitions_of,
    partitions_up_to,
    rising_factorial,
    schur_dimension,
    schur_eval,
    schur_tableau,
    vandermonde,
    zonal,
)

__version__ = "0.1.0"
