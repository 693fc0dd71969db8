"""Jacobi eigensolvers (scalar, blocked, recursive) and one-sided Jacobi SVD,
with pivoted convergence safeguards and an instrumented cost model."""

from .block import BlockJacobiConfig, block_jacobi, block_sub_solve
from .core import (BlockPartition, ConvergenceState, HistoryRow, gather_cross,
                   max_off_diag, off_diag_norm, read_matrix, read_matrix_binary,
                   read_matrix_text, scatter_cross, symmetrize, write_matrix_binary,
                   write_matrix_text)
from .costs import (CostLedger, eig_flops, lupp_flops, matmul_flops, matmul_via_eig,
                    predict_block_sweep, predict_recursive, predict_svd_sweep,
                    predict_words, qrcp_flops)
from .orderings import Ordering, next_max_pivot, next_max_pivot_block, parse_ordering, sweep_pairs
from .pivoting import PivotResult, QrcpResult, lemma_bound, pivot_fix, qrcp, recursive_lupp
from .recursive import RecursiveJacobiConfig, effective_block_size, recursive_jacobi
from .rotations import (BlockRotation, Rotation2x2, apply_block_right,
                        apply_block_two_sided, apply_right, apply_two_sided, solve_2x2)
from .scalar import ScalarJacobiConfig, scalar_jacobi, single_sweep
from .svd import SvdConfig, SvdResult, jacobi_svd, qr_preprocess

__all__ = [
    "BlockJacobiConfig", "BlockPartition", "BlockRotation", "ConvergenceState",
    "CostLedger", "HistoryRow", "Ordering", "PivotResult", "QrcpResult",
    "RecursiveJacobiConfig", "Rotation2x2", "ScalarJacobiConfig", "SvdConfig",
    "SvdResult", "apply_block_right", "apply_block_two_sided", "apply_right",
    "apply_two_sided", "block_jacobi", "block_sub_solve", "effective_block_size",
    "eig_flops", "gather_cross", "jacobi_svd", "lemma_bound", "lupp_flops",
    "matmul_flops", "matmul_via_eig", "max_off_diag", "next_max_pivot",
    "next_max_pivot_block", "off_diag_norm", "parse_ordering", "pivot_fix",
    "predict_block_sweep", "predict_recursive", "predict_svd_sweep", "predict_words",
    "qr_preprocess", "qrcp", "qrcp_flops", "read_matrix", "read_matrix_binary",
    "read_matrix_text", "recursive_jacobi", "recursive_lupp", "scalar_jacobi",
    "scatter_cross", "single_sweep", "solve_2x2", "sweep_pairs", "symmetrize",
    "write_matrix_binary", "write_matrix_text",
]
