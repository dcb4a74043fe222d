"""Tests for the reduction-based AMG operators, cycles, and the second pass."""

import numpy as np
import pytest
import scipy.linalg

from amganneal import amgr, metrics
from amganneal.annealing import AnnealConfig
from amganneal.errors import CoarseningStalledError
from amganneal.partition import geometric_blocks, global_subdomain, greedy_coarsen
from amganneal.problems import (
    AnisotropyParams,
    gen_anisotropic,
    gen_convection_diffusion,
    gen_fd_laplacian_5pt,
)
from amganneal.sparse import CfSplitting, SparseMatrix, dominance_check, spmv, transpose

from test_sparse import lap1d

THETA = 0.56


def checkerboard(N):
    """F at even-parity grid points; their 5-point neighbors are all C."""
    f = [i for i in range(N * N) if ((i // N) + (i % N)) % 2 == 0]
    return CfSplitting.from_f_indices(N * N, f)


def identity_matrix(n):
    idx = np.arange(n)
    return SparseMatrix.from_coo(n, n, idx, idx, np.ones(n))


def dense_mg2(level, nu):
    """R^nu * T * R^nu assembled from the level's stored operators."""
    Ad = level.A.to_dense()
    n = level.A.n_rows
    dinv = np.zeros((n, n))
    fi = level.f_idx
    dinv[fi, fi] = 1.0 / level.d_ff
    relax = np.eye(n) - level.sigma * dinv @ Ad
    P = level.P.to_dense()
    correct = np.eye(n) - P @ np.linalg.solve(P.T @ Ad @ P, P.T @ Ad)
    return np.linalg.matrix_power(relax, nu) @ correct @ np.linalg.matrix_power(relax, nu)


def a_norm(M, Ad):
    w, V = np.linalg.eigh(Ad)
    root = V @ np.diag(np.sqrt(w)) @ V.T
    return np.linalg.norm(root @ M @ np.linalg.solve(root, np.eye(len(w))), 2)


def theorem_premises(A, splitting, theta):
    """Dense check of the three convergence-theorem hypotheses."""
    Ad = A.to_dense()
    fi = splitting.f_indices()
    d = (2.0 - 1.0 / theta) * np.diag(Ad)[fi]
    eps = (2.0 - 2.0 * theta) / (2.0 * theta - 1.0)
    E = Ad[np.ix_(fi, fi)].copy()
    E[np.diag_indices(fi.size)] -= d
    split_low = np.linalg.eigvalsh(E).min() >= -1e-10
    split_high = np.linalg.eigvalsh(np.diag(eps * d) - E).min() >= -1e-10
    hat = Ad.copy()
    hat[np.ix_(fi, fi)] = np.diag(d)
    coupled = np.linalg.eigvalsh(hat).min() >= -1e-10
    return split_low, split_high, coupled


class TestBuildDff:
    def test_theta_one_limit(self):
        A = lap1d(5)
        s = CfSplitting.from_f_indices(5, [0, 2, 4])
        d, eps, sigma = amgr.build_dff(A, s, 1.0)
        assert np.array_equal(d, np.full(3, 2.0))
        assert eps == 0.0
        assert sigma == 1.0

    def test_theta_056_constants(self):
        A = lap1d(3)
        s = CfSplitting.from_f_indices(3, [0, 2])
        d, eps, sigma = amgr.build_dff(A, s, THETA)
        assert eps == pytest.approx(22.0 / 3.0, rel=1e-12)
        assert sigma == pytest.approx(3.0 / 14.0, rel=1e-12)

    def test_diagonal_four_example(self):
        A = gen_fd_laplacian_5pt(3)
        s = CfSplitting.from_f_indices(9, [0, 2, 6, 8])
        d, _, _ = amgr.build_dff(A, s, THETA)
        assert np.allclose(d, (2.0 - 1.0 / THETA) * 4.0)
        assert d[0] == pytest.approx(0.857143, abs=5e-7)

    def test_theta_below_half_rejected(self):
        A = lap1d(3)
        s = CfSplitting.from_f_indices(3, [0, 2])
        with pytest.raises(ValueError):
            amgr.build_dff(A, s, 0.5)

    def test_unfinalized_rejected(self):
        A = lap1d(3)
        with pytest.raises(ValueError):
            amgr.build_dff(A, CfSplitting(3), THETA)

    def test_nonpositive_diagonal_rejected(self):
        A = SparseMatrix.from_dense(np.array([[-1.0, 0.0], [0.0, 2.0]]))
        s = CfSplitting.from_f_indices(2, [0])
        with pytest.raises(ValueError):
            amgr.build_dff(A, s, THETA)

    def test_per_row_uses_measured_dominance(self):
        # checkerboard F-points have no F-neighbors, so theta_i = 1 and the
        # per-row diagonal recovers A's own diagonal exactly
        A = gen_fd_laplacian_5pt(4)
        s = checkerboard(4)
        d, eps, sigma = amgr.build_dff(A, s, THETA, per_row_theta=True)
        assert np.array_equal(d, A.diagonal()[s.f_indices()])
        assert eps == pytest.approx(22.0 / 3.0, rel=1e-12)
        assert sigma == pytest.approx(3.0 / 14.0, rel=1e-12)

    def test_per_row_never_below_uniform(self):
        A = gen_fd_laplacian_5pt(8)
        s = greedy_coarsen(A, THETA)
        d_uniform, _, _ = amgr.build_dff(A, s, THETA)
        d_row, _, _ = amgr.build_dff(A, s, THETA, per_row_theta=True)
        assert np.all(d_row >= d_uniform - 1e-15)

    def test_per_row_infeasible_rejected(self):
        A = lap1d(3)
        s = CfSplitting.from_f_indices(3, [0, 1, 2])
        with pytest.raises(ValueError, match="infeasible"):
            amgr.build_dff(A, s, THETA, per_row_theta=True)


class TestBuildInterpolation:
    def test_1d_worked_example(self):
        """1D n=3, F={0,2}, theta=0.56: each F-row weight is exactly
        -(-1)/((2-1/0.56)*2) = 7/3."""
        A = lap1d(3)
        s = CfSplitting.from_f_indices(3, [0, 2])
        d, _, _ = amgr.build_dff(A, s, THETA)
        P = amgr.build_interpolation(A, s, d).to_dense()
        assert P.shape == (3, 1)
        assert P[0, 0] == pytest.approx(7.0 / 3.0, rel=1e-12)
        assert P[2, 0] == pytest.approx(7.0 / 3.0, rel=1e-12)
        assert P[1, 0] == 1.0

    def test_c_rows_are_unit(self):
        A = gen_fd_laplacian_5pt(8)
        s = greedy_coarsen(A, THETA)
        d, _, _ = amgr.build_dff(A, s, THETA)
        P = amgr.build_interpolation(A, s, d).to_dense()
        c = s.c_indices()
        expected = np.zeros((c.size, c.size))
        expected[np.arange(c.size), np.arange(c.size)] = 1.0
        assert np.array_equal(P[c], expected)

    def test_theta_one_gives_diagonal_scaling(self):
        A = lap1d(3)
        s = CfSplitting.from_f_indices(3, [0, 2])
        d, _, _ = amgr.build_dff(A, s, 1.0)
        P = amgr.build_interpolation(A, s, d).to_dense()
        assert P[0, 0] == pytest.approx(0.5, rel=1e-14)

    def test_matches_dense_formula_and_nonnegative(self):
        A = gen_fd_laplacian_5pt(5)
        s = greedy_coarsen(A, THETA)
        d, _, _ = amgr.build_dff(A, s, THETA)
        P = amgr.build_interpolation(A, s, d).to_dense()
        f, c = s.f_indices(), s.c_indices()
        dense = -A.to_dense()[np.ix_(f, c)] / d[:, None]
        assert np.allclose(P[f], dense, atol=1e-14)
        assert np.all(P >= 0.0)

    def test_zero_dff_rejected(self):
        A = lap1d(3)
        s = CfSplitting.from_f_indices(3, [0, 2])
        with pytest.raises(ValueError, match="zero"):
            amgr.build_interpolation(A, s, np.array([0.0, 1.0]))

    def test_wrong_length_rejected(self):
        A = lap1d(3)
        s = CfSplitting.from_f_indices(3, [0, 2])
        with pytest.raises(ValueError, match="length"):
            amgr.build_interpolation(A, s, np.ones(3))


class TestBuildRestriction:
    def test_symmetric_is_transpose(self):
        A = gen_fd_laplacian_5pt(6)
        s = greedy_coarsen(A, THETA)
        d, _, _ = amgr.build_dff(A, s, THETA)
        P = amgr.build_interpolation(A, s, d)
        R = amgr.build_restriction(A, s, d, symmetric=True)
        assert np.array_equal(R.to_dense(), P.to_dense().T)

    def test_pure_diffusion_nonsymmetric_equals_transpose(self):
        A = gen_convection_diffusion(6, 1e-2, (0.0, 0.0))
        s = greedy_coarsen(A, THETA)
        d, _, _ = amgr.build_dff(A, s, THETA)
        P = amgr.build_interpolation(A, s, d)
        R = amgr.build_restriction(A, s, d, symmetric=False)
        assert np.allclose(R.to_dense(), P.to_dense().T, atol=1e-14)

    def test_upwind_asymmetry_detected(self):
        A = gen_convection_diffusion(6, 1e-4, (1.0, 0.0))
        s = greedy_coarsen(A, THETA)
        d, _, _ = amgr.build_dff(A, s, THETA)
        P = amgr.build_interpolation(A, s, d)
        R = amgr.build_restriction(A, s, d, symmetric=False)
        assert not np.allclose(R.to_dense(), P.to_dense().T)

    def test_matches_dense_formula(self):
        A = gen_convection_diffusion(5, 1e-3, (2.0, 3.0))
        s = greedy_coarsen(A, THETA)
        d, _, _ = amgr.build_dff(A, s, THETA)
        R = amgr.build_restriction(A, s, d, symmetric=False).to_dense()
        f, c = s.f_indices(), s.c_indices()
        dense = np.zeros((c.size, A.n_rows))
        dense[:, f] = -A.to_dense()[np.ix_(c, f)] / d[None, :]
        dense[np.arange(c.size), c] = 1.0
        assert np.allclose(R, dense, atol=1e-14)


class TestGalerkinCoarse:
    def test_identity_transfer_preserves_matrix(self):
        A = gen_fd_laplacian_5pt(4)
        I = identity_matrix(16)
        coarse = amgr.galerkin_coarse(I, A, I)
        assert np.array_equal(coarse.to_dense(), A.to_dense())

    def test_1d_coarse_value(self):
        """P = [7/3, 1, 7/3] on the n=3 chain gives the 1x1 coarse matrix
        p^T A p = 130/9."""
        A = lap1d(3)
        s = CfSplitting.from_f_indices(3, [0, 2])
        d, _, _ = amgr.build_dff(A, s, THETA)
        P = amgr.build_interpolation(A, s, d)
        coarse = amgr.galerkin_coarse(transpose(P), A, P)
        assert coarse.n_rows == 1 and coarse.n_cols == 1
        assert coarse.to_dense()[0, 0] == pytest.approx(130.0 / 9.0, rel=1e-12)
        dense = P.to_dense().T @ A.to_dense() @ P.to_dense()
        assert np.allclose(coarse.to_dense(), dense, rtol=1e-14)

    def test_symmetry_preserved(self):
        A = gen_fd_laplacian_5pt(8)
        s = greedy_coarsen(A, THETA)
        d, _, _ = amgr.build_dff(A, s, THETA)
        P = amgr.build_interpolation(A, s, d)
        coarse = amgr.galerkin_coarse(transpose(P), A, P).to_dense()
        assert np.allclose(coarse, coarse.T, atol=1e-12)

    def test_dimension_mismatch_rejected(self):
        A = gen_fd_laplacian_5pt(4)
        I = identity_matrix(15)
        with pytest.raises(ValueError, match="dimension"):
            amgr.galerkin_coarse(I, A, I)


def two_level(A, theta=THETA, nu=1, **kwargs):
    return amgr.build_hierarchy(A, "greedy", 2, theta, nu=nu, **kwargs)


class TestFRelax:
    def test_fixed_point_at_solution(self):
        h = two_level(gen_fd_laplacian_5pt(4))
        lvl = h.levels[0]
        rng = np.random.default_rng(0)
        x_true = rng.standard_normal(16)
        b = spmv(lvl.A, x_true)
        out = amgr.f_relax(lvl, x_true, b)
        assert np.allclose(out, x_true, atol=1e-12)

    def test_c_entries_untouched(self):
        h = two_level(gen_fd_laplacian_5pt(4))
        lvl = h.levels[0]
        rng = np.random.default_rng(1)
        x = rng.standard_normal(16)
        b = rng.standard_normal(16)
        out = amgr.f_relax(lvl, x, b)
        c = lvl.splitting.c_indices()
        assert np.array_equal(out[c], x[c])
        assert not np.array_equal(out, x)

    def test_dense_operator_equivalence(self):
        h = two_level(lap1d(5))
        lvl = h.levels[0]
        rng = np.random.default_rng(2)
        x = rng.standard_normal(5)
        b = rng.standard_normal(5)
        dinv = np.zeros(5)
        dinv[lvl.f_idx] = 1.0 / lvl.d_ff
        expected = x + lvl.sigma * dinv * (b - lvl.A.to_dense() @ x)
        assert np.allclose(amgr.f_relax(lvl, x, b), expected, atol=1e-13)


class TestCycle:
    def test_all_coarse_hierarchy_solves_exactly(self):
        A = gen_fd_laplacian_5pt(3)
        h = amgr.AmgrHierarchy(
            levels=[],
            coarsest_a=A,
            coarsest_factorization=scipy.linalg.lu_factor(A.to_dense()),
            cycle="V",
            nu=1,
            theta=THETA,
        )
        rng = np.random.default_rng(3)
        x_true = rng.standard_normal(9)
        out = amgr.cycle(h, 0, np.zeros(9), spmv(A, x_true))
        assert np.allclose(out, x_true, atol=1e-12)
        assert metrics.asymptotic_rho(h, k=5, seed=0) < 1e-8

    def test_zero_error_stays_zero(self):
        h = two_level(gen_fd_laplacian_5pt(4))
        out = amgr.cycle(h, 0, np.zeros(16), np.zeros(16))
        assert np.array_equal(out, np.zeros(16))

    @pytest.mark.parametrize(
        "matrix,nu",
        [
            (lap1d(6), 1),
            (lap1d(6), 2),
            (gen_fd_laplacian_5pt(5), 1),
            (gen_fd_laplacian_5pt(6), 1),
        ],
        ids=["chain6", "chain6-nu2", "fd5x5", "fd6x6"],
    )
    def test_dense_mg2_oracle(self, matrix, nu):
        """One V-cycle with zero RHS applies R^nu T R^nu to the error."""
        h = two_level(matrix, nu=nu)
        M = dense_mg2(h.levels[0], nu)
        rng = np.random.default_rng(4)
        e = rng.standard_normal(matrix.n_rows)
        out = amgr.cycle(h, 0, e, np.zeros(matrix.n_rows))
        assert np.allclose(out, M @ e, atol=1e-10)

    def test_v_and_w_coincide_on_two_levels(self):
        A = gen_fd_laplacian_5pt(5)
        hv = amgr.build_hierarchy(A, "greedy", 2, THETA, cycle_type="V")
        hw = amgr.build_hierarchy(A, "greedy", 2, THETA, cycle_type="W")
        rng = np.random.default_rng(5)
        x = rng.standard_normal(25)
        b = rng.standard_normal(25)
        assert np.array_equal(amgr.cycle(hv, 0, x, b), amgr.cycle(hw, 0, x, b))

    def test_range_of_p_annihilated_without_relaxation(self):
        h = two_level(lap1d(6), nu=0)
        P = h.levels[0].P.to_dense()
        rng = np.random.default_rng(6)
        err = P @ rng.standard_normal(P.shape[1])
        out = amgr.cycle(h, 0, err, np.zeros(6))
        assert np.max(np.abs(out)) < 1e-10


class TestConvergenceBound:
    """The two-level A-norm bound sqrt(eps/(1+eps)*(1+eps/(2+eps)^2)) holds
    whenever the theorem's three premises do; they are verified densely here
    rather than assumed."""

    def bound(self, eps, nu=1):
        return np.sqrt(
            (eps / (1 + eps)) * (1 + eps ** (2 * nu - 1) / (2 + eps) ** (2 * nu))
        )

    def mg2_a_norm(self, A, s, theta):
        d, eps, sigma = amgr.build_dff(A, s, theta)
        P = amgr.build_interpolation(A, s, d)
        R = transpose(P)
        lvl = amgr.AmgrLevel(
            A=A, splitting=s, d_ff=d, epsilon=eps, sigma=sigma, P=P, R=R
        )
        return a_norm(dense_mg2(lvl, 1), A.to_dense()), self.bound(eps)

    def test_chain_pair_satisfies_bound(self):
        A = lap1d(4)
        s = CfSplitting.from_f_indices(4, [0, 1])
        assert all(theorem_premises(A, s, 2.0 / 3.0))
        norm, bound = self.mg2_a_norm(A, s, 2.0 / 3.0)
        assert bound == pytest.approx(np.sqrt(3.0) / 2.0, rel=1e-12)
        assert norm == pytest.approx(7.0 / 12.0, abs=1e-9)
        assert norm <= bound

    def test_shifted_grid_satisfies_bound(self):
        base = gen_fd_laplacian_5pt(5)
        A = SparseMatrix.from_dense(base.to_dense() + 2.0 * np.eye(25))
        s = checkerboard(5)
        assert all(theorem_premises(A, s, 0.75))
        norm, bound = self.mg2_a_norm(A, s, 0.75)
        assert norm <= bound

    def test_exact_equivalence_gives_exact_solver(self):
        # theta=1 with a checkerboard splitting means D_FF == A_FF, the bound
        # is zero, and the two-level cycle is a direct solver
        A = gen_fd_laplacian_5pt(6)
        s = checkerboard(6)
        assert all(theorem_premises(A, s, 1.0))
        norm, bound = self.mg2_a_norm(A, s, 1.0)
        assert bound == 0.0
        assert norm < 1e-12

    def test_bound_requires_coupling_premise(self):
        """theta-dominance alone does not imply the theorem's third premise;
        the greedy fd 8x8 splitting is feasible yet violates it, and its
        uniform-D_FF A-norm genuinely exceeds the bound (the asymptotic
        factor of the table configurations still sits far below it)."""
        A = gen_fd_laplacian_5pt(8)
        s = greedy_coarsen(A, THETA)
        assert dominance_check(A, s, THETA)
        low, high, coupled = theorem_premises(A, s, THETA)
        assert low and high and not coupled
        norm, bound = self.mg2_a_norm(A, s, THETA)
        assert bound == pytest.approx(0.9767710236555245, rel=1e-12)
        assert norm > bound + 0.005


class TestStrengthGraph:
    def test_fd_laplacian_all_neighbors_strong(self):
        A = gen_fd_laplacian_5pt(4)
        g = amgr.strength_graph(A, 0.30)
        assert g.nnz == A.nnz - 16
        for i in range(16):
            cols, vals = g.row(i)
            acols, _ = A.row(i)
            assert np.array_equal(cols, acols[acols != i])
            assert np.all(vals == 1.0)

    def test_diagonal_matrix_empty(self):
        g = amgr.strength_graph(identity_matrix(5), 0.30)
        assert g.nnz == 0

    def test_positive_offdiagonals_have_no_strong_edges(self):
        A = SparseMatrix.from_dense(np.array([[2.0, 1.0], [1.0, 2.0]]))
        assert amgr.strength_graph(A, 0.30).nnz == 0

    def test_threshold_filters_weak_entries(self):
        A = SparseMatrix.from_dense(
            np.array(
                [
                    [4.0, -2.0, -1.0, 0.5],
                    [-2.0, 4.0, 0.0, 0.0],
                    [-1.0, 0.0, 4.0, 0.0],
                    [0.5, 0.0, 0.0, 4.0],
                ]
            )
        )
        g = amgr.strength_graph(A, 0.6)
        edges = {(i, int(j)) for i in range(4) for j in g.row(i)[0]}
        assert edges == {(0, 1), (1, 0), (2, 0)}

    @pytest.mark.parametrize("bad", [0.0, -0.1, 1.0001])
    def test_threshold_range_enforced(self, bad):
        with pytest.raises(ValueError):
            amgr.strength_graph(lap1d(3), bad)


def assert_common_c_postcondition(A, splitting, theta_s):
    """Every strongly connected F-F pair shares a strong C-neighbor."""
    g = amgr.strength_graph(A, theta_s)
    in_f = np.zeros(splitting.n, dtype=bool)
    in_f[splitting.f_indices()] = True
    in_c = np.zeros(splitting.n, dtype=bool)
    in_c[splitting.c_indices()] = True
    for i in splitting.f_indices():
        si = set(g.row(int(i))[0].tolist())
        for j in si:
            if in_f[j]:
                sj = set(g.row(int(j))[0].tolist())
                assert any(in_c[k] for k in si & sj), (i, j)


class TestSecondPass:
    def test_no_strong_ff_pairs_unchanged(self):
        A = gen_fd_laplacian_5pt(6)
        s = checkerboard(6)
        out = amgr.second_pass(A, s, 0.30)
        assert np.array_equal(out.labels, s.labels)

    def test_chain_all_f(self):
        out = amgr.second_pass(lap1d(5), CfSplitting.from_f_indices(5, range(5)), 1.0)
        assert out.f_indices().tolist() == [0, 2, 4]

    def test_double_violation_promotes_the_scanned_point(self):
        # hub 0 strongly connects to three mutually unconnected leaves; the
        # second violation at i=0 must restore the first leaf and promote 0
        A = SparseMatrix.from_dense(
            np.array(
                [
                    [3.0, -1.0, -1.0, -1.0],
                    [-1.0, 2.0, 0.0, 0.0],
                    [-1.0, 0.0, 2.0, 0.0],
                    [-1.0, 0.0, 0.0, 2.0],
                ]
            )
        )
        out = amgr.second_pass(A, CfSplitting.from_f_indices(4, range(4)), 0.9)
        assert out.f_indices().tolist() == [1, 2, 3]
        assert out.c_indices().tolist() == [0]

    def test_anisotropic_fe_postcondition_and_shrink(self):
        A = gen_anisotropic(16, AnisotropyParams(delta=1e-6, angle=np.pi / 3), "FE")
        s = greedy_coarsen(A, THETA)
        out = amgr.second_pass(A, s, 0.30)
        assert_common_c_postcondition(A, out, 0.30)
        assert set(out.f_indices().tolist()) <= set(s.f_indices().tolist())
        assert out.n_f < s.n_f
        assert dominance_check(A, out, THETA)

    def test_unfinalized_rejected(self):
        with pytest.raises(ValueError):
            amgr.second_pass(lap1d(3), CfSplitting(3), 0.5)


class TestClassicalInterpolation:
    def test_all_strong_c_neighborhood(self):
        # checkerboard F-point: four strong C-neighbors, no strong F, so each
        # weight is -a_ic/a_ii = 1/4
        A = gen_fd_laplacian_5pt(4)
        s = checkerboard(4)
        P = amgr.build_classical_interpolation(A, s, 0.30).to_dense()
        f, c = s.f_indices(), s.c_indices()
        interior_f = [i for i in f if len(A.row(int(i))[0]) == 5]
        for i in interior_f:
            row = P[i]
            assert np.count_nonzero(row) == 4
            assert np.allclose(row[row != 0], 0.25)
        expected = np.zeros((c.size, c.size))
        np.fill_diagonal(expected, 1.0)
        assert np.array_equal(P[c], expected)

    def test_strong_f_distribution_by_hand(self):
        """Distributing the strong F-F connection through the two shared
        C-points gives w = (1 + 2*(1/2))/4 = 1/2 on each."""
        A = SparseMatrix.from_dense(
            np.array(
                [
                    [4.0, -2.0, -1.0, -1.0],
                    [-2.0, 4.0, -1.0, -1.0],
                    [-1.0, -1.0, 4.0, 0.0],
                    [-1.0, -1.0, 0.0, 4.0],
                ]
            )
        )
        s = CfSplitting.from_f_indices(4, [0, 1])
        assert_common_c_postcondition(A, s, 0.4)
        P = amgr.build_classical_interpolation(A, s, 0.4).to_dense()
        assert np.allclose(P[0], [0.5, 0.5], atol=1e-14)
        assert np.allclose(P[1], [0.5, 0.5], atol=1e-14)
        assert P[0].sum() == pytest.approx(1.0, rel=1e-14)

    def test_zero_spread_lumps_into_diagonal(self):
        # F-neighbor 1 has no stored entry into 0's interpolation set, so its
        # coupling is treated as weak: w = -a_02/(a_00 + a_01) = 1/2
        A = SparseMatrix.from_dense(
            np.array(
                [
                    [4.0, -2.0, -1.0, 0.0],
                    [-2.0, 4.0, 0.0, -1.0],
                    [-1.0, 0.0, 2.0, 0.0],
                    [0.0, -1.0, 0.0, 2.0],
                ]
            )
        )
        s = CfSplitting.from_f_indices(4, [0, 1])
        P = amgr.build_classical_interpolation(A, s, 0.4).to_dense()
        assert np.allclose(P[0], [0.5, 0.0], atol=1e-14)
        assert np.allclose(P[1], [0.0, 0.5], atol=1e-14)

    def test_second_pass_then_classical_pipeline(self):
        A = gen_anisotropic(8, AnisotropyParams(delta=1e-6, angle=np.pi / 3), "FE")
        s = amgr.second_pass(A, greedy_coarsen(A, THETA), 0.30)
        P = amgr.build_classical_interpolation(A, s, 0.30)
        assert P.n_rows == 64 and P.n_cols == s.n_c
        c = s.c_indices()
        dense = P.to_dense()
        assert np.array_equal(
            dense[c], np.eye(c.size)
        )


class TestBuildHierarchy:
    def test_identity_greedy_single_f_level(self):
        h = amgr.build_hierarchy(identity_matrix(8), "greedy", 2, THETA)
        assert h.n_levels == 2
        assert h.levels[0].splitting.n_f == 8
        assert h.coarsest_a.n_rows == 0
        assert h.coarsest_factorization is None
        out = amgr.cycle(h, 0, np.ones(8), np.zeros(8))
        assert np.linalg.norm(out) < np.linalg.norm(np.ones(8))

    def test_coarse_cap_honored(self):
        A = gen_fd_laplacian_5pt(8)
        h = amgr.build_hierarchy(A, "greedy", 5, THETA, coarse_cap=16)
        assert h.coarsest_a.n_rows <= 16
        assert h.n_levels >= 2

    def test_galerkin_chain_is_consistent(self):
        A = gen_fd_laplacian_5pt(8)
        h = amgr.build_hierarchy(A, "greedy", 3, THETA, coarse_cap=4)
        for lvl, coarser in zip(h.levels, h.levels[1:] + [None]):
            product = amgr.galerkin_coarse(lvl.R, lvl.A, lvl.P)
            nxt = coarser.A if coarser is not None else h.coarsest_a
            assert np.allclose(product.to_dense(), nxt.to_dense(), atol=1e-12)

    def test_stalled_coarsening_raises(self):
        A = gen_fd_laplacian_5pt(3)
        all_c = CfSplitting.from_f_indices(9, [])
        with pytest.raises(CoarseningStalledError):
            amgr.build_hierarchy(A, "greedy", 2, THETA, level0_splitting=all_c)

    def test_no_progress_stops_early(self):
        A = lap1d(10)
        s = CfSplitting.from_f_indices(10, [0])
        h = amgr.build_hierarchy(A, "greedy", 3, THETA, level0_splitting=s)
        assert h.n_levels == 1
        assert h.coarsest_a.n_rows == 10

    def test_sa_coarsener_reproducible(self):
        A = gen_fd_laplacian_5pt(8)
        cfg = AnnealConfig(theta=THETA, total_steps_per_dof=300, seed=5)
        dec = geometric_blocks(8, (3, 3), A, THETA)
        h1 = amgr.build_hierarchy(A, cfg, 2, THETA, level0_decomposition=dec)
        h2 = amgr.build_hierarchy(A, cfg, 2, THETA, level0_decomposition=dec)
        assert np.array_equal(
            h1.levels[0].splitting.labels, h2.levels[0].splitting.labels
        )
        assert np.array_equal(
            h1.coarsest_a.to_dense(), h2.coarsest_a.to_dense()
        )

    def test_per_row_dff_is_default_and_recorded(self):
        A = gen_fd_laplacian_5pt(4)
        h = amgr.build_hierarchy(A, "greedy", 2, THETA)
        hu = amgr.build_hierarchy(A, "greedy", 2, THETA, per_row_dff=False)
        assert h.per_row_dff and not hu.per_row_dff
        assert np.all(h.levels[0].d_ff >= hu.levels[0].d_ff - 1e-15)
        assert np.allclose(
            hu.levels[0].d_ff,
            (2.0 - 1.0 / THETA) * A.diagonal()[hu.levels[0].f_idx],
        )

    def test_describe_reports_levels(self):
        A = gen_fd_laplacian_5pt(6)
        h = amgr.build_hierarchy(A, "greedy", 2, THETA, cycle_type="W", nu=2)
        doc = h.describe()
        assert doc["cycle"] == "W" and doc["nu"] == 2
        assert doc["theta"] == THETA and doc["per_row_dff"] is True
        assert doc["levels"][0]["n"] == 36
        assert doc["levels"][0]["n_f"] == h.levels[0].splitting.n_f
        assert doc["levels"][-1].keys() == {"n", "nnz"}

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"levels": 1},
            {"cycle_type": "F"},
            {"nu": -1},
            {"interpolation": "cubic"},
            {"interpolation": "classical"},
            {"interpolation": "classical", "second_pass_theta": 0.3, "symmetric": False},
            {"coarsener": "fastest"},
        ],
        ids=[
            "too-few-levels",
            "bad-cycle",
            "negative-nu",
            "bad-interpolation",
            "classical-needs-strength",
            "classical-needs-symmetry",
            "bad-coarsener",
        ],
    )
    def test_invalid_configuration_rejected(self, kwargs):
        args = {"coarsener": "greedy", "levels": 2}
        args.update(kwargs)
        with pytest.raises(ValueError):
            amgr.build_hierarchy(
                lap1d(8), args.pop("coarsener"), args.pop("levels"), THETA, **args
            )

    def test_classical_interpolation_mode(self):
        A = gen_anisotropic(8, AnisotropyParams(delta=1e-6, angle=np.pi / 3), "FE")
        h = amgr.build_hierarchy(
            A,
            "greedy",
            2,
            THETA,
            second_pass_theta=0.30,
            interpolation="classical",
        )
        assert h.interpolation == "classical" and h.theta_s == 0.30
        assert np.array_equal(h.levels[0].R.to_dense(), h.levels[0].P.to_dense().T)
        rho = metrics.asymptotic_rho(h, k=100, seed=0)
        assert rho < 1.0
