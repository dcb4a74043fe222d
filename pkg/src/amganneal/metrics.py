"""Convergence-factor and complexity measurements for built hierarchies."""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from typing import Dict, List, Mapping, Tuple

import numpy as np

from .amgr import AmgrHierarchy, cycle
from .sparse import CfSplitting


@dataclass
class SolveReport:
    """Measured solver quality for one hierarchy."""

    rho: float
    c_grid: float
    c_op: float
    f_ratio: float
    k_used: int
    seed: int
    diverged: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def measure_rho(
    hierarchy: AmgrHierarchy, k: int = 800, seed: int = 0
) -> Tuple[float, int, bool]:
    """Geometric-mean per-cycle contraction over k cycles with zero RHS.

    The iterate is renormalized to unit 2-norm every cycle and factors are
    accumulated in log space, so the result equals (|x_k|/|x_0|)^(1/k)
    without underflowing at large k.  Stops early and flags divergence when
    the accumulated factor exceeds 10, and reports an exact solver as 0.
    Returns (rho, cycles run, diverged).
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    n = hierarchy.levels[0].A.n_rows if hierarchy.levels else hierarchy.coarsest_a.n_rows
    if n == 0:
        return 0.0, 0, False
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, n)
    x /= np.linalg.norm(x)
    b = np.zeros(n)
    log_sum = 0.0
    for i in range(1, k + 1):
        x = cycle(hierarchy, 0, x, b)
        factor = float(np.linalg.norm(x))
        if factor == 0.0:
            return 0.0, i, False
        x /= factor
        log_sum += math.log(factor)
        if log_sum > math.log(10.0):
            return math.exp(log_sum / i), i, True
    return math.exp(log_sum / k), k, False


def asymptotic_rho(hierarchy: AmgrHierarchy, k: int = 800, seed: int = 0) -> float:
    """Asymptotic convergence factor of the hierarchy's cycle."""
    rho, _, _ = measure_rho(hierarchy, k, seed)
    return rho


def complexities(hierarchy: AmgrHierarchy) -> Tuple[float, float]:
    """(grid complexity, operator complexity) relative to the finest level."""
    sizes = hierarchy.grid_sizes()
    nnzs = hierarchy.nnz_counts()
    if sizes[0] == 0 or nnzs[0] == 0:
        raise ValueError("empty finest level")
    return sum(sizes) / sizes[0], sum(nnzs) / nnzs[0]


def f_ratio(splitting: CfSplitting) -> float:
    """Fraction of points eliminated by relaxation, |F| / n."""
    if not splitting.finalized:
        raise ValueError("splitting is not finalized")
    return splitting.n_f / splitting.n


def solve_report(hierarchy: AmgrHierarchy, k: int = 800, seed: int = 0) -> SolveReport:
    """Measure rho and complexities; f_ratio refers to the finest splitting."""
    rho, k_used, diverged = measure_rho(hierarchy, k, seed)
    c_grid, c_op = complexities(hierarchy)
    ratio = f_ratio(hierarchy.levels[0].splitting) if hierarchy.levels else 0.0
    return SolveReport(
        rho=rho,
        c_grid=c_grid,
        c_op=c_op,
        f_ratio=ratio,
        k_used=k_used,
        seed=seed,
        diverged=diverged,
    )


def comparison_rows(reports: Mapping[str, SolveReport]) -> List[Dict[str, object]]:
    """Side-by-side rows (one per coarsening method) in table-column order."""
    return [
        {
            "method": label,
            "f_ratio": rep.f_ratio,
            "rho": rep.rho,
            "c_grid": rep.c_grid,
            "c_op": rep.c_op,
        }
        for label, rep in reports.items()
    ]
