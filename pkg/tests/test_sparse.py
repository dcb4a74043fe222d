"""Tests for the sparse container, splittings, and primitive operations."""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from amganneal.sparse import (
    CfSplitting,
    SparseMatrix,
    dominance_check,
    dominance_factor,
    extract_blocks,
    read_matrix_market,
    spmv,
    transpose,
    write_matrix_market,
)


def lap1d(n):
    """1D 3-point Laplacian (rows [2,-1], [-1,2,-1], [-1,2])."""
    main = 2.0 * np.ones(n)
    off = -np.ones(n - 1)
    rows = np.concatenate([np.arange(n), np.arange(n - 1), np.arange(1, n)])
    cols = np.concatenate([np.arange(n), np.arange(1, n), np.arange(n - 1)])
    vals = np.concatenate([main, off, off])
    return SparseMatrix.from_coo(n, n, rows, cols, vals)


def random_sparse(rng, n_rows, n_cols, density=0.3):
    dense = rng.random((n_rows, n_cols))
    dense[dense > density] = 0.0
    return SparseMatrix.from_dense(dense)


class TestSparseMatrix:
    def test_from_coo_sums_duplicates_and_drops_zeros(self):
        A = SparseMatrix.from_coo(2, 2, [0, 0, 1, 1], [0, 0, 1, 1], [1.0, 2.0, 5.0, -5.0])
        assert A.nnz == 1
        assert A.to_dense()[0, 0] == 3.0

    def test_column_indices_sorted_within_rows(self):
        A = SparseMatrix.from_coo(1, 4, [0, 0, 0], [3, 0, 2], [1.0, 2.0, 3.0])
        assert_array_equal(A.col_indices, [0, 2, 3])

    def test_row_view(self):
        A = lap1d(3)
        cols, vals = A.row(1)
        assert_array_equal(cols, [0, 1, 2])
        assert_array_equal(vals, [-1.0, 2.0, -1.0])

    def test_diagonal(self):
        assert_array_equal(lap1d(4).diagonal(), [2.0, 2.0, 2.0, 2.0])

    def test_is_symmetric(self):
        assert lap1d(5).is_symmetric()
        B = SparseMatrix.from_coo(2, 2, [0], [1], [1.0])
        assert not B.is_symmetric()

    def test_dense_round_trip(self):
        rng = np.random.default_rng(0)
        A = random_sparse(rng, 7, 5)
        assert_array_equal(SparseMatrix.from_dense(A.to_dense()).to_dense(), A.to_dense())


class TestSpmv:
    def test_identity(self):
        I = SparseMatrix.from_dense(np.eye(3))
        assert_array_equal(spmv(I, np.array([1.0, 2.0, 3.0])), [1.0, 2.0, 3.0])

    def test_lap1d_constant_vector(self):
        assert_array_equal(spmv(lap1d(3), np.ones(3)), [1.0, 0.0, 1.0])

    def test_empty_row_gives_zero(self):
        A = SparseMatrix.from_coo(3, 3, [0, 2], [0, 2], [1.0, 1.0])
        y = spmv(A, np.array([5.0, 6.0, 7.0]))
        assert y[1] == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            spmv(lap1d(3), np.ones(4))


class TestTranspose:
    def test_symmetric_fixed_point(self):
        A = lap1d(6)
        assert_array_equal(transpose(A).to_dense(), A.to_dense())

    def test_single_entry(self):
        A = SparseMatrix.from_coo(2, 3, [0], [2], [5.0])
        At = transpose(A)
        assert (At.n_rows, At.n_cols) == (3, 2)
        assert At.to_dense()[2, 0] == 5.0

    def test_involution(self):
        rng = np.random.default_rng(1)
        A = random_sparse(rng, 8, 11)
        assert transpose(transpose(A)) == A


class TestCfSplitting:
    def test_from_f_indices(self):
        s = CfSplitting.from_f_indices(5, [0, 2, 4])
        assert_array_equal(s.f_indices(), [0, 2, 4])
        assert_array_equal(s.c_indices(), [1, 3])
        assert s.finalized
        assert (s.n_f, s.n_c) == (3, 2)

    def test_unfinalized(self):
        s = CfSplitting(4)
        assert not s.finalized
        assert_array_equal(s.u_indices(), [0, 1, 2, 3])

    def test_copy_is_independent(self):
        s = CfSplitting.from_f_indices(3, [0])
        t = s.copy()
        t.labels[0] = s.labels[1]
        assert_array_equal(s.f_indices(), [0])


class TestExtractBlocks:
    def test_all_f(self):
        A = lap1d(4)
        s = CfSplitting.from_f_indices(4, [0, 1, 2, 3])
        ff, fc, cf, cc = extract_blocks(A, s)
        assert_array_equal(ff.to_dense(), A.to_dense())
        assert fc.n_cols == 0 and cf.n_rows == 0 and cc.n_rows == 0

    def test_lap1d_hand_extraction(self):
        s = CfSplitting.from_f_indices(3, [0, 2])
        ff, fc, cf, cc = extract_blocks(lap1d(3), s)
        assert_array_equal(ff.to_dense(), [[2.0, 0.0], [0.0, 2.0]])
        assert_array_equal(fc.to_dense(), [[-1.0], [-1.0]])
        assert_array_equal(cf.to_dense(), [[-1.0, -1.0]])
        assert_array_equal(cc.to_dense(), [[2.0]])

    def test_reassembly_is_identity(self):
        rng = np.random.default_rng(2)
        A = random_sparse(rng, 10, 10)
        f = np.flatnonzero(rng.random(10) < 0.5)
        if f.size == 0:
            f = np.array([0])
        s = CfSplitting.from_f_indices(10, f)
        ff, fc, cf, cc = extract_blocks(A, s)
        perm = np.concatenate([s.f_indices(), s.c_indices()])
        top = np.hstack([ff.to_dense(), fc.to_dense()])
        bot = np.hstack([cf.to_dense(), cc.to_dense()])
        assert_array_equal(np.vstack([top, bot]), A.to_dense()[np.ix_(perm, perm)])

    def test_unfinalized_rejected(self):
        with pytest.raises(ValueError):
            extract_blocks(lap1d(3), CfSplitting(3))


class TestDominance:
    def test_diagonal_only_row(self):
        I = SparseMatrix.from_dense(np.eye(3))
        s = CfSplitting.from_f_indices(3, [0, 1, 2])
        assert dominance_factor(I, s, 1) == 1.0

    def test_interior_row_full_f(self):
        s = CfSplitting.from_f_indices(5, [0, 1, 2, 3, 4])
        assert dominance_factor(lap1d(5), s, 2) == 0.5

    def test_interior_row_one_neighbor_in_f(self):
        assert_allclose(dominance_factor(lap1d(5), {1, 2}, 2), 2.0 / 3.0)

    def test_zero_diagonal_rejected(self):
        A = SparseMatrix.from_coo(2, 2, [0, 1], [1, 0], [1.0, 1.0])
        with pytest.raises(ValueError):
            dominance_factor(A, {0, 1}, 0)

    def test_empty_f_sum_gives_infinity(self):
        A = SparseMatrix.from_dense(np.diag([2.0, 3.0]))
        assert dominance_factor(A, {1}, 0) == np.inf

    def test_dominance_check(self):
        A = lap1d(5)
        assert dominance_check(A, [0, 2, 4], 0.56)
        assert not dominance_check(A, [0, 1, 2, 3, 4], 0.56)


class TestMatrixMarket:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        A = random_sparse(rng, 9, 6)
        path = tmp_path / "a.mtx"
        write_matrix_market(A, path)
        assert read_matrix_market(path) == A

    def test_one_by_one(self, tmp_path):
        path = tmp_path / "one.mtx"
        write_matrix_market(SparseMatrix.from_dense([[4.0]]), path)
        lines = [l for l in path.read_text().splitlines() if not l.startswith("%")]
        assert lines[0].split() == ["1", "1", "1"]
        assert len(lines) == 2

    def test_duplicates_summed(self, tmp_path):
        path = tmp_path / "dup.mtx"
        path.write_text(
            "%%MatrixMarket matrix coordinate real general\n"
            "2 2 3\n1 1 1.5\n1 1 2.5\n2 2 1.0\n"
        )
        assert_array_equal(read_matrix_market(path).to_dense(), [[4.0, 0.0], [0.0, 1.0]])

    def test_symmetric_storage_expanded(self, tmp_path):
        path = tmp_path / "sym.mtx"
        path.write_text(
            "%%MatrixMarket matrix coordinate real symmetric\n"
            "3 3 3\n1 1 2.0\n2 1 -1.0\n3 3 2.0\n"
        )
        dense = read_matrix_market(path).to_dense()
        assert dense[0, 1] == dense[1, 0] == -1.0
        assert dense[0, 0] == 2.0

    def test_bad_header_has_line_number(self, tmp_path):
        path = tmp_path / "bad.mtx"
        path.write_text("%%MatrixMarket matrix array real general\n1 1\n4.0\n")
        with pytest.raises(ValueError, match=r"bad\.mtx:1"):
            read_matrix_market(path)

    def test_out_of_range_index_has_line_number(self, tmp_path):
        path = tmp_path / "oob.mtx"
        path.write_text(
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n"
        )
        with pytest.raises(ValueError, match=r"oob\.mtx:3"):
            read_matrix_market(path)
