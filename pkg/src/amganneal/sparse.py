"""Sparse CSR container, C/F splittings, and the primitive operations built on them.

Vectors are plain ``numpy.ndarray`` of float64 throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse as _sp

__all__ = [
    "SparseMatrix",
    "CfSplitting",
    "F",
    "C",
    "U",
    "spmv",
    "transpose",
    "extract_blocks",
    "dominance_factor",
    "read_matrix_market",
    "write_matrix_market",
]

# Label tags. U marks indices not yet assigned by a coarsener.
U, F, C = 0, 1, 2


@dataclass(frozen=True)
class SparseMatrix:
    """Square-or-rectangular sparse matrix in CSR layout.

    Invariants (established at construction): ``row_offsets`` nondecreasing of
    length ``n_rows + 1``; column indices strictly increasing within each row;
    no explicitly stored zeros.
    """

    n_rows: int
    n_cols: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray

    @staticmethod
    def from_coo(n_rows, n_cols, rows, cols, vals):
        """Build from coordinate triples; duplicates are summed, zeros dropped."""
        m = _sp.coo_matrix(
            (np.asarray(vals, dtype=np.float64),
             (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
            shape=(n_rows, n_cols),
        ).tocsr()
        return SparseMatrix.from_scipy(m)

    @staticmethod
    def from_dense(dense):
        dense = np.asarray(dense, dtype=np.float64)
        return SparseMatrix.from_scipy(_sp.csr_matrix(dense))

    @staticmethod
    def from_scipy(m):
        m = m.tocsr().copy()
        m.sum_duplicates()
        m.eliminate_zeros()
        m.sort_indices()
        return SparseMatrix(
            n_rows=m.shape[0],
            n_cols=m.shape[1],
            row_offsets=m.indptr.astype(np.int64),
            col_indices=m.indices.astype(np.int64),
            values=m.data.astype(np.float64),
        )

    def to_scipy(self):
        return _sp.csr_matrix(
            (self.values, self.col_indices, self.row_offsets),
            shape=(self.n_rows, self.n_cols),
        )

    def to_dense(self):
        return self.to_scipy().toarray()

    @property
    def nnz(self):
        return int(self.row_offsets[-1])

    def diagonal(self):
        return self.to_scipy().diagonal()

    def row(self, i):
        """Return (col_indices, values) of row i as array views."""
        lo, hi = self.row_offsets[i], self.row_offsets[i + 1]
        return self.col_indices[lo:hi], self.values[lo:hi]

    def is_symmetric(self, rtol=1e-12):
        if self.n_rows != self.n_cols:
            return False
        m = self.to_scipy()
        d = abs(m - m.T)
        if d.nnz == 0:
            return True
        scale = max(abs(self.values).max(), 1.0) if self.nnz else 1.0
        return d.max() <= rtol * scale

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (
            self.n_rows == other.n_rows
            and self.n_cols == other.n_cols
            and np.array_equal(self.row_offsets, other.row_offsets)
            and np.array_equal(self.col_indices, other.col_indices)
            and np.array_equal(self.values, other.values)
        )


@dataclass
class CfSplitting:
    """Per-index assignment to the F, C, or (transient) U set."""

    n: int
    labels: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.labels is None:
            self.labels = np.full(self.n, U, dtype=np.int8)
        else:
            self.labels = np.asarray(self.labels, dtype=np.int8)
            if self.labels.shape != (self.n,):
                raise ValueError("labels length does not match n")

    @staticmethod
    def from_f_indices(n, f_indices):
        """Finalized splitting with the given F set; everything else C."""
        labels = np.full(n, C, dtype=np.int8)
        labels[np.asarray(f_indices, dtype=np.int64)] = F
        return CfSplitting(n, labels)

    def f_indices(self):
        return np.flatnonzero(self.labels == F).astype(np.int64)

    def c_indices(self):
        return np.flatnonzero(self.labels == C).astype(np.int64)

    def u_indices(self):
        return np.flatnonzero(self.labels == U).astype(np.int64)

    @property
    def finalized(self):
        return not np.any(self.labels == U)

    @property
    def n_f(self):
        return int(np.count_nonzero(self.labels == F))

    @property
    def n_c(self):
        return int(np.count_nonzero(self.labels == C))

    def copy(self):
        return CfSplitting(self.n, self.labels.copy())


def spmv(A: SparseMatrix, x) -> np.ndarray:
    """Matrix-vector product A @ x."""
    x = np.asarray(x, dtype=np.float64)
    if A.n_cols != x.shape[0]:
        raise ValueError(f"dimension mismatch: A is {A.n_rows}x{A.n_cols}, x has length {x.shape[0]}")
    return A.to_scipy() @ x


def transpose(A: SparseMatrix) -> SparseMatrix:
    return SparseMatrix.from_scipy(A.to_scipy().T.tocsr())


def extract_blocks(A: SparseMatrix, s: CfSplitting):
    """Extract (A_FF, A_FC, A_CF, A_CC) with A's actual signed entries.

    The partitioned form in the underlying theory writes the off-diagonal
    blocks with an explicit minus sign; the blocks returned here are the raw
    submatrices of A.
    """
    if not s.finalized:
        raise ValueError("splitting is not finalized (contains U labels)")
    m = A.to_scipy()
    fi, ci = s.f_indices(), s.c_indices()
    return (
        SparseMatrix.from_scipy(m[np.ix_(fi, fi)]),
        SparseMatrix.from_scipy(m[np.ix_(fi, ci)]),
        SparseMatrix.from_scipy(m[np.ix_(ci, fi)]),
        SparseMatrix.from_scipy(m[np.ix_(ci, ci)]),
    )


def dominance_factor(A: SparseMatrix, s, i: int) -> float:
    """Diagonal dominance factor theta_i = |A_ii| / sum_{j in F} |A_ij|.

    ``s`` may be a CfSplitting or any iterable of F indices (candidate F-set).
    Returns +inf when row i has no F entries at all.
    """
    if isinstance(s, CfSplitting):
        in_f = s.labels == F
    else:
        in_f = np.zeros(A.n_cols, dtype=bool)
        in_f[np.asarray(list(s), dtype=np.int64)] = True
    cols, vals = A.row(i)
    diag_mask = cols == i
    if not diag_mask.any() or vals[diag_mask][0] == 0.0:
        raise ValueError(f"row {i} has zero diagonal; dominance undefined")
    denom = np.abs(vals[in_f[cols]]).sum()
    if denom == 0.0:
        return np.inf
    return float(abs(vals[diag_mask][0]) / denom)


def dominance_check(A: SparseMatrix, f_indices, theta: float) -> bool:
    """Exact feasibility test: |A_ii| >= theta * sum_{j in F}|A_ij| for all i in F.

    ``f_indices`` may be a CfSplitting or an iterable of F indices.  Strict
    floating comparison, no tolerance (this is the optimization constraint
    itself).
    """
    if isinstance(f_indices, CfSplitting):
        f_indices = f_indices.f_indices()
    in_f = np.zeros(A.n_rows, dtype=bool)
    f_indices = np.asarray(f_indices, dtype=np.int64)
    in_f[f_indices] = True
    indptr, indices, vals = A.row_offsets, A.col_indices, np.abs(A.values)
    diag = A.diagonal()
    for i in f_indices:
        lo, hi = indptr[i], indptr[i + 1]
        ssum = vals[lo:hi][in_f[indices[lo:hi]]].sum()
        if abs(diag[i]) < theta * ssum:
            return False
    return True


def _mm_error(path, lineno, msg):
    return ValueError(f"{path}:{lineno}: {msg}")


def read_matrix_market(path) -> SparseMatrix:
    """Read a coordinate-format Matrix Market file (real, general or symmetric).

    Symmetric storage is expanded to full storage; duplicate entries are
    summed. Malformed input raises ValueError with the offending line number.
    """
    path = str(path)
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise _mm_error(path, 1, "empty file")
    header = lines[0].split()
    if (
        len(header) < 5
        or header[0] not in ("%%MatrixMarket", "%%matrixmarket")
        or header[1].lower() != "matrix"
        or header[2].lower() != "coordinate"
    ):
        raise _mm_error(path, 1, "expected '%%MatrixMarket matrix coordinate real <symmetry>' header")
    fieldtype, symmetry = header[3].lower(), header[4].lower()
    if fieldtype not in ("real", "integer"):
        raise _mm_error(path, 1, f"unsupported field type {fieldtype!r}")
    if symmetry not in ("general", "symmetric"):
        raise _mm_error(path, 1, f"unsupported symmetry {symmetry!r}")

    lineno = 1
    size = None
    for lineno in range(2, len(lines) + 1):
        text = lines[lineno - 1].strip()
        if not text or text.startswith("%"):
            continue
        size = text.split()
        break
    if size is None:
        raise _mm_error(path, len(lines), "missing size line")
    if len(size) != 3:
        raise _mm_error(path, lineno, "size line must be 'rows cols nnz'")
    try:
        n_rows, n_cols, nnz = (int(tok) for tok in size)
    except ValueError:
        raise _mm_error(path, lineno, "non-integer size line") from None

    rows, cols, vals = [], [], []
    seen = 0
    for entry_lineno in range(lineno + 1, len(lines) + 1):
        text = lines[entry_lineno - 1].strip()
        if not text or text.startswith("%"):
            continue
        parts = text.split()
        if len(parts) != 3:
            raise _mm_error(path, entry_lineno, "entry line must be 'i j value'")
        try:
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise _mm_error(path, entry_lineno, f"cannot parse entry {text!r}") from None
        if not (1 <= i <= n_rows and 1 <= j <= n_cols):
            raise _mm_error(path, entry_lineno, f"index ({i}, {j}) out of bounds for {n_rows}x{n_cols}")
        rows.append(i - 1)
        cols.append(j - 1)
        vals.append(v)
        if symmetry == "symmetric" and i != j:
            rows.append(j - 1)
            cols.append(i - 1)
            vals.append(v)
        seen += 1
    if seen != nnz:
        raise _mm_error(path, len(lines), f"expected {nnz} entries, found {seen}")
    return SparseMatrix.from_coo(n_rows, n_cols, rows, cols, vals)


def write_matrix_market(A: SparseMatrix, path) -> None:
    """Write coordinate-format Matrix Market (real general, 17 significant digits)."""
    m = A.to_scipy().tocoo()
    with open(str(path), "w") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        fh.write(f"{A.n_rows} {A.n_cols} {m.nnz}\n")
        for i, j, v in zip(m.row, m.col, m.data):
            fh.write(f"{i + 1} {j + 1} {v:.17g}\n")
