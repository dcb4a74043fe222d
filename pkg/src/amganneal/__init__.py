"""amganneal: diagonally dominant C/F splittings by simulated annealing, and
the reduction-based AMG solver built on top of them."""

from .errors import CoarseningStalledError, InfeasibleSplittingError
from .sparse import (
    C,
    CfSplitting,
    F,
    SparseMatrix,
    U,
    dominance_check,
    dominance_factor,
    extract_blocks,
    read_matrix_market,
    spmv,
    transpose,
    write_matrix_market,
)

__version__ = "0.1.0"

__all__ = [
    "C",
    "CfSplitting",
    "CoarseningStalledError",
    "F",
    "InfeasibleSplittingError",
    "SparseMatrix",
    "U",
    "__version__",
    "dominance_check",
    "dominance_factor",
    "extract_blocks",
    "read_matrix_market",
    "spmv",
    "transpose",
    "write_matrix_market",
]
