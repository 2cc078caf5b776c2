"""Butterfly factorization of complementary low-rank operators.

Build a product of O(log n) sparse factors from either sampled entries or
black-box applications of the operator, then apply it (and its adjoint) in
O(n log n) flops.
"""

from .bench import (BenchConfig, BenchReport, BenchRow, OperatorReference,
                    RowSampledReference, estimate_eps_a, run_bench)
from .construct import (block_diagonal_probe, factorize,
                        middle_factorization_matvec,
                        middle_factorization_sampling, recursive_factor_u,
                        recursive_factor_v)
from .factors import (BlockDiagonalFactor, ButterflyFactors, MiddleFactor,
                      NnzReport, TransferFactor, factors_equal)
from .kernels import (ComposedOperator, DftKernel, FioKernel, HankelKernel,
                      composed_matvec, dense_matrix, dft_apply, fio_entry,
                      hankel_entry)
from .lowrank import (FactorFormA, LowRankApprox, OversamplingParams,
                      randomized_sampling_svd, randomized_svd, to_form_a,
                      to_form_scaled_u, to_form_scaled_v, truncated_svd)
from .oracles import (BlockView, DenseOracle, EntryFunctionOracle,
                      OracleError)
from .partition import BlockId, DyadicPartition, block_cols, block_rows, \
    make_partition
from .storage import (FormatError, load_factors, read_vector, save_factors,
                      write_vector)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
