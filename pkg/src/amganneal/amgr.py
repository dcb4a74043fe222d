"""Reduction-based algebraic multigrid on explicit C/F splittings.

Given a splitting whose F-block is diagonally dominant, the solver
approximates A_FF by the diagonal D_FF, interpolates with the induced
operator [D_FF^{-1}(-A_FC); I], and corrects on the Galerkin (or
Petrov-Galerkin) coarse matrix.  The module also provides the classical
strength graph, the Ruge-Stuben second-pass augmentation for problems
that are not diagonally dominant, and a recursive hierarchy builder with
V/W cycles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Union

import numpy as np
import scipy.linalg

from .annealing import AnnealConfig, sa_coarsen
from .errors import CoarseningStalledError
from .partition import SubdomainDecomposition, greedy_coarsen, lloyd_aggregate
from .sparse import CfSplitting, SparseMatrix, dominance_factor, spmv, transpose

# The stored matrix keeps its natural signs; the underlying partitioned
# form writes the off-diagonal blocks negated, so every formula below
# negates stored F-C and C-F entries explicitly.


def build_dff(
    A: SparseMatrix, splitting: CfSplitting, theta: float, *, per_row_theta: bool = False
):
    """Diagonal F-block approximation and the derived (epsilon, sigma).

    (D_FF)_ii = (2 - 1/theta) * A_ii on F; epsilon = (2-2*theta)/(2*theta-1)
    bounds the splitting error A_FF - D_FF; sigma = 2/(2+epsilon) damps
    F-relaxation.  With ``per_row_theta`` each row uses its measured
    dominance factor theta_i in place of the uniform worst-case theta,
    which tightens D_FF toward A_FF row by row (epsilon and sigma keep the
    uniform values, since theta_i >= theta only shrinks the splitting
    error).  Solvers match the reference convergence tables only in
    per-row mode; the uniform formula is the worst-case bound the theory
    is stated for.
    """
    if theta <= 0.5:
        raise ValueError("theta must exceed 1/2")
    if not splitting.finalized:
        raise ValueError("splitting is not finalized")
    f_idx = splitting.f_indices()
    diag_f = A.diagonal()[f_idx]
    if np.any(diag_f <= 0.0):
        raise ValueError("nonpositive diagonal on an F-point")
    if per_row_theta:
        theta_rows = np.array(
            [dominance_factor(A, splitting, int(i)) for i in f_idx]
        )
        if np.any(theta_rows <= 0.5):
            raise ValueError(
                "per-row dominance at or below 1/2; splitting is infeasible"
            )
        d_ff = (2.0 - 1.0 / theta_rows) * diag_f
    else:
        d_ff = (2.0 - 1.0 / theta) * diag_f
    epsilon = (2.0 - 2.0 * theta) / (2.0 * theta - 1.0)
    sigma = 2.0 / (2.0 + epsilon)
    return d_ff, epsilon, sigma


def build_interpolation(A: SparseMatrix, splitting: CfSplitting, d_ff) -> SparseMatrix:
    """n x |C| interpolation: F-rows carry -A_ic/(D_FF)_ii, C-rows are unit."""
    if not splitting.finalized:
        raise ValueError("splitting is not finalized")
    f_idx, c_idx = splitting.f_indices(), splitting.c_indices()
    d_ff = np.asarray(d_ff, dtype=np.float64)
    if d_ff.shape[0] != f_idx.shape[0]:
        raise ValueError("D_FF length does not match the F-set")
    if np.any(d_ff == 0.0):
        raise ValueError("zero D_FF entry")
    w = A.to_scipy()[f_idx][:, c_idx].tocoo()
    rows = np.concatenate([f_idx[w.row], c_idx])
    cols = np.concatenate([w.col, np.arange(c_idx.size)])
    vals = np.concatenate([-w.data / d_ff[w.row], np.ones(c_idx.size)])
    return SparseMatrix.from_coo(A.n_rows, int(c_idx.size), rows, cols, vals)


def build_restriction(
    A: SparseMatrix, splitting: CfSplitting, d_ff, symmetric: bool = True
) -> SparseMatrix:
    """|C| x n restriction: P-transpose, or [-A_CF D_FF^{-1}  I] when the
    problem is nonsymmetric and the transpose would mix upwind directions."""
    if symmetric:
        return transpose(build_interpolation(A, splitting, d_ff))
    if not splitting.finalized:
        raise ValueError("splitting is not finalized")
    f_idx, c_idx = splitting.f_indices(), splitting.c_indices()
    d_ff = np.asarray(d_ff, dtype=np.float64)
    if d_ff.shape[0] != f_idx.shape[0]:
        raise ValueError("D_FF length does not match the F-set")
    if np.any(d_ff == 0.0):
        raise ValueError("zero D_FF entry")
    w = A.to_scipy()[c_idx][:, f_idx].tocoo()
    rows = np.concatenate([w.row, np.arange(c_idx.size)])
    cols = np.concatenate([f_idx[w.col], c_idx])
    vals = np.concatenate([-w.data / d_ff[w.col], np.ones(c_idx.size)])
    return SparseMatrix.from_coo(int(c_idx.size), A.n_rows, rows, cols, vals)


def galerkin_coarse(R: SparseMatrix, A: SparseMatrix, P: SparseMatrix) -> SparseMatrix:
    """Exact sparse triple product R*A*P."""
    if R.n_cols != A.n_rows or A.n_cols != P.n_rows:
        raise ValueError(
            f"dimension mismatch: R is {R.n_rows}x{R.n_cols}, "
            f"A is {A.n_rows}x{A.n_cols}, P is {P.n_rows}x{P.n_cols}"
        )
    prod = (R.to_scipy() @ A.to_scipy() @ P.to_scipy()).tocsr()
    prod.eliminate_zeros()
    return SparseMatrix.from_scipy(prod)


@dataclass
class AmgrLevel:
    """One fine level: its matrix, splitting, and transfer operators."""

    A: SparseMatrix
    splitting: CfSplitting
    d_ff: np.ndarray
    epsilon: float
    sigma: float
    P: SparseMatrix
    R: SparseMatrix

    @property
    def f_idx(self) -> np.ndarray:
        return self.splitting.f_indices()


@dataclass
class AmgrHierarchy:
    """A built multilevel solver; ``levels`` excludes the coarsest grid."""

    levels: List[AmgrLevel]
    coarsest_a: SparseMatrix
    coarsest_factorization: Optional[tuple]
    cycle: str
    nu: int
    theta: float
    theta_s: Optional[float] = None
    interpolation: str = "amgr"
    per_row_dff: bool = True

    @property
    def n_levels(self) -> int:
        return len(self.levels) + 1

    def grid_sizes(self) -> List[int]:
        return [lvl.A.n_rows for lvl in self.levels] + [self.coarsest_a.n_rows]

    def nnz_counts(self) -> List[int]:
        return [lvl.A.nnz for lvl in self.levels] + [self.coarsest_a.nnz]

    def describe(self) -> dict:
        """Per-level sizes and solver settings, ready for serialization."""
        level_rows = [
            {
                "n": lvl.A.n_rows,
                "nnz": lvl.A.nnz,
                "n_f": lvl.splitting.n_f,
                "n_c": lvl.splitting.n_c,
            }
            for lvl in self.levels
        ]
        level_rows.append({"n": self.coarsest_a.n_rows, "nnz": self.coarsest_a.nnz})
        return {
            "levels": level_rows,
            "cycle": self.cycle,
            "nu": self.nu,
            "theta": self.theta,
            "theta_s": self.theta_s,
            "interpolation": self.interpolation,
            "per_row_dff": self.per_row_dff,
        }


def f_relax(level: AmgrLevel, x, b) -> np.ndarray:
    """One damped F-point relaxation: x_F += sigma * D_FF^{-1} (b - A x)_F."""
    x = np.array(x, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    f = level.f_idx
    r = b - spmv(level.A, x)
    x[f] += level.sigma * (r[f] / level.d_ff)
    return x


def cycle(hierarchy: AmgrHierarchy, level: int, x, b) -> np.ndarray:
    """One multigrid cycle from ``level`` down; returns the updated iterate."""
    if level == len(hierarchy.levels):
        if hierarchy.coarsest_a.n_rows == 0:
            return np.zeros(0)
        return scipy.linalg.lu_solve(
            hierarchy.coarsest_factorization, np.asarray(b, dtype=np.float64)
        )
    lvl = hierarchy.levels[level]
    x = np.array(x, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    for _ in range(hierarchy.nu):
        x = f_relax(lvl, x, b)
    r_c = spmv(lvl.R, b - spmv(lvl.A, x))
    e_c = np.zeros(lvl.P.n_cols)
    recursions = 1 if hierarchy.cycle == "V" else 2
    for _ in range(recursions):
        e_c = cycle(hierarchy, level + 1, e_c, r_c)
    x = x + spmv(lvl.P, e_c)
    for _ in range(hierarchy.nu):
        x = f_relax(lvl, x, b)
    return x


def strength_graph(A: SparseMatrix, theta_s: float) -> SparseMatrix:
    """Directed strong-influence graph: edge i->j iff
    -A_ij >= theta_s * max_{k != i}(-A_ik), with no edges from rows whose
    largest negated off-diagonal is nonpositive."""
    if not 0.0 < theta_s <= 1.0:
        raise ValueError("strength threshold must lie in (0, 1]")
    rows, cols = [], []
    for i in range(A.n_rows):
        cols_i, vals_i = A.row(i)
        off = cols_i != i
        if not off.any():
            continue
        neg = -vals_i[off]
        cutoff = theta_s * neg.max()
        if cutoff <= 0.0:
            continue
        strong = cols_i[off][neg >= cutoff]
        rows.extend([i] * strong.size)
        cols.extend(strong.tolist())
    return SparseMatrix.from_coo(A.n_rows, A.n_cols, rows, cols, np.ones(len(rows)))


def second_pass(A: SparseMatrix, splitting: CfSplitting, theta_s: float) -> CfSplitting:
    """Augment C until every strongly connected F-F pair shares a strong
    C-neighbor.

    F-points are scanned in index order.  The first violating neighbor of a
    point is promoted tentatively; a second violation promotes the point
    itself instead and restores the tentative neighbor.  C only grows, so F
    shrinks and feasibility of the input splitting is preserved.
    """
    if not splitting.finalized:
        raise ValueError("splitting is not finalized")
    n = A.n_rows
    graph = strength_graph(A, theta_s)
    in_f = np.zeros(n, dtype=bool)
    in_f[splitting.f_indices()] = True
    in_c = np.zeros(n, dtype=bool)
    in_c[splitting.c_indices()] = True

    def lacks_common_c(i: int, j: int) -> bool:
        common = np.intersect1d(graph.row(i)[0], graph.row(j)[0], assume_unique=True)
        return not in_c[common].any()

    for i in range(n):
        if not in_f[i]:
            continue
        tentative = -1
        for j in graph.row(i)[0]:
            if not in_f[j] or not lacks_common_c(i, int(j)):
                continue
            if tentative < 0:
                tentative = int(j)
                in_c[tentative] = True
                in_f[tentative] = False
            else:
                in_c[tentative] = False
                in_f[tentative] = True
                in_c[i] = True
                in_f[i] = False
                break

    result = CfSplitting.from_f_indices(n, np.flatnonzero(in_f))
    for i in result.f_indices():
        for j in graph.row(i)[0]:
            if in_f[j] and lacks_common_c(int(i), int(j)):
                raise RuntimeError(
                    f"second pass left F-pair ({i}, {j}) without a common strong C-neighbor"
                )
    return result


def build_classical_interpolation(
    A: SparseMatrix, splitting: CfSplitting, theta_s: float
) -> SparseMatrix:
    """Classical direct interpolation from strong C-neighbors, distributing
    strong F-connections through shared C-points and lumping weak ones into
    the diagonal.  Intended for second-pass splittings, where every strong
    F-F pair is guaranteed a common strong C-neighbor."""
    if not splitting.finalized:
        raise ValueError("splitting is not finalized")
    n = A.n_rows
    f_idx, c_idx = splitting.f_indices(), splitting.c_indices()
    graph = strength_graph(A, theta_s)
    in_c = np.zeros(n, dtype=bool)
    in_c[c_idx] = True
    coarse_col = np.full(n, -1, dtype=np.int64)
    coarse_col[c_idx] = np.arange(c_idx.size)

    rows, cols, vals = [], [], []
    for i in f_idx:
        cols_i, vals_i = A.row(i)
        strong = set(graph.row(i)[0].tolist())
        interp_set = {int(c) for c in cols_i if in_c[c] and int(c) in strong}
        denom = 0.0
        contrib = {c: 0.0 for c in interp_set}
        for j, a_ij in zip(cols_i, vals_i):
            j = int(j)
            if j == i:
                denom += a_ij
            elif j in strong and not in_c[j]:
                cols_j, vals_j = A.row(j)
                mask = np.isin(cols_j, list(interp_set))
                spread = float(vals_j[mask].sum())
                if spread == 0.0:
                    denom += a_ij
                else:
                    for k, a_jk in zip(cols_j[mask], vals_j[mask]):
                        contrib[int(k)] += a_ij * a_jk / spread
            elif j in interp_set:
                contrib[j] += a_ij
            else:
                denom += a_ij
        if denom == 0.0:
            raise ValueError(f"zero interpolation denominator at row {i}")
        for c, value in contrib.items():
            rows.append(int(i))
            cols.append(int(coarse_col[c]))
            vals.append(-value / denom)
    rows.extend(int(c) for c in c_idx)
    cols.extend(range(c_idx.size))
    vals.extend([1.0] * c_idx.size)
    return SparseMatrix.from_coo(n, int(c_idx.size), rows, cols, vals)


def build_hierarchy(
    A: SparseMatrix,
    coarsener: Union[str, AnnealConfig],
    levels: int,
    theta: float,
    *,
    symmetric: bool = True,
    second_pass_theta: Optional[float] = None,
    interpolation: str = "amgr",
    cycle_type: str = "V",
    nu: int = 1,
    coarse_cap: int = 16,
    lloyd_avg_size: int = 36,
    level0_decomposition: Optional[SubdomainDecomposition] = None,
    level0_splitting: Optional[CfSplitting] = None,
    per_row_dff: bool = True,
) -> AmgrHierarchy:
    """Coarsen recursively and assemble transfer operators level by level.

    ``coarsener`` is "greedy" or an AnnealConfig.  Level 0 may use a caller
    decomposition or a precomputed splitting; deeper levels always aggregate
    algebraically, since coarse DoFs carry no grid structure.  Construction
    stops early when the coarse grid reaches ``coarse_cap`` points or when
    coarsening stops making progress (|C| >= 0.9 n).  D_FF uses per-row
    dominance by default; see build_dff.
    """
    if levels < 2:
        raise ValueError("a hierarchy needs at least 2 levels")
    if cycle_type not in ("V", "W"):
        raise ValueError("cycle must be 'V' or 'W'")
    if nu < 0:
        raise ValueError("nu must be nonnegative")
    if interpolation not in ("amgr", "classical"):
        raise ValueError("interpolation must be 'amgr' or 'classical'")
    if interpolation == "classical":
        if second_pass_theta is None:
            raise ValueError("classical interpolation requires a strength threshold")
        if not symmetric:
            raise ValueError("classical interpolation is restricted to symmetric mode")
    if not (isinstance(coarsener, AnnealConfig) or coarsener == "greedy"):
        raise ValueError("coarsener must be 'greedy' or an AnnealConfig")

    built: List[AmgrLevel] = []
    current = A
    depth = 0
    while depth < levels - 1:
        if depth == 0 and level0_splitting is not None:
            splitting = level0_splitting
        elif coarsener == "greedy":
            splitting = greedy_coarsen(current, theta)
        else:
            if depth == 0 and level0_decomposition is not None:
                decomp = level0_decomposition
            else:
                decomp = lloyd_aggregate(
                    current, lloyd_avg_size, seed=coarsener.seed + depth, prepin_theta=theta
                )
            splitting, _ = sa_coarsen(current, decomp, coarsener)
        if second_pass_theta is not None:
            splitting = second_pass(current, splitting, second_pass_theta)
        if splitting.n_f == 0:
            raise CoarseningStalledError(
                f"coarsening stalled at level {depth}: every point stayed coarse"
            )
        if splitting.n_c >= 0.9 * current.n_rows:
            break
        d_ff, epsilon, sigma = build_dff(
            current, splitting, theta, per_row_theta=per_row_dff
        )
        if interpolation == "classical":
            P = build_classical_interpolation(current, splitting, second_pass_theta)
            R = transpose(P)
        else:
            P = build_interpolation(current, splitting, d_ff)
            R = (
                transpose(P)
                if symmetric
                else build_restriction(current, splitting, d_ff, symmetric=False)
            )
        coarse = galerkin_coarse(R, current, P)
        built.append(
            AmgrLevel(
                A=current,
                splitting=splitting,
                d_ff=d_ff,
                epsilon=epsilon,
                sigma=sigma,
                P=P,
                R=R,
            )
        )
        current = coarse
        depth += 1
        if current.n_rows <= coarse_cap:
            break

    factorization = (
        scipy.linalg.lu_factor(current.to_dense()) if current.n_rows > 0 else None
    )
    return AmgrHierarchy(
        levels=built,
        coarsest_a=current,
        coarsest_factorization=factorization,
        cycle=cycle_type,
        nu=nu,
        theta=theta,
        theta_s=second_pass_theta,
        interpolation=interpolation,
        per_row_dff=per_row_dff,
    )
