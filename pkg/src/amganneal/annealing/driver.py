"""Simulated-annealing coarsening driver.

Owns the run state shared by every backend, schedules sweeps over the
subdomains, and finalizes the best feasible splitting found.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Tuple

import numpy as np

from ..errors import InfeasibleSplittingError
from ..partition import SubdomainDecomposition
from ..sparse import CfSplitting, SparseMatrix, dominance_check, transpose
from . import _engine
from .config import AnnealConfig, temperature_schedule
from .rng import Pcg32

#: Trace sample: (global step, temperature, best |F| so far, sweep index).
TraceSample = Tuple[int, float, int, int]


def _resolve_backend(name: Optional[str]):
    if name is None or name == "auto":
        name = os.environ.get("AMGANNEAL_BACKEND", "auto")
    if name == "python":
        return _engine
    if name == "cython":
        from . import _kernel

        return _kernel
    if name == "auto":
        try:
            from . import _kernel

            return _kernel
        except ImportError:
            return _engine
    raise ValueError(f"unknown backend {name!r}")


def backend_name(name: Optional[str] = None) -> str:
    """Label of the visit kernel that would run: "cython" or "python"."""
    module = _resolve_backend(name)
    return "cython" if module.__name__.endswith("_kernel") else "python"


@dataclass
class AnnealState:
    """Everything a coarsening run carries between visits.

    The flat arrays are shared with the backend kernels; the Python-side
    helpers (`set_local`, `try_splice`) implement the same label and
    splice semantics for the readable reference path.
    """

    A: SparseMatrix
    decomp: SubdomainDecomposition
    config: AnnealConfig
    backend: object
    alpha: float
    sweeps: int
    n_total_steps: int
    pts: List[np.ndarray]
    # |A| in row and column (transposed) form, plus |diagonal|
    ap: np.ndarray
    aj: np.ndarray
    ax: np.ndarray
    tp: np.ndarray
    tj: np.ndarray
    tx: np.ndarray
    diag_abs: np.ndarray
    sub_of: np.ndarray
    eff: np.ndarray
    src_f: np.ndarray
    global_f: np.ndarray
    best_f: np.ndarray
    visited: np.ndarray
    n_bar: np.ndarray
    z_sub: np.ndarray
    fsum: np.ndarray
    sat: np.ndarray
    member: np.ndarray
    omega_stamp: np.ndarray
    closure_stamp: np.ndarray
    closure_list: np.ndarray
    save_stamp: np.ndarray
    save_rows: np.ndarray
    save_fsum: np.ndarray
    save_sat: np.ndarray
    spl_stamp: np.ndarray
    spl_list: np.ndarray
    sel_buf: np.ndarray
    f_buf: np.ndarray
    c_buf: np.ndarray
    trace_step: np.ndarray
    trace_size: np.ndarray
    trace_temp: np.ndarray
    regs_f: np.ndarray
    regs_i: np.ndarray
    rng_regs: np.ndarray
    trace: List[TraceSample] = field(default_factory=list)
    current_sweep: int = 0
    _trace_drained: int = 0

    @classmethod
    def create(
        cls,
        A: SparseMatrix,
        decomp: SubdomainDecomposition,
        config: AnnealConfig,
        backend: Optional[str] = None,
    ) -> "AnnealState":
        if A.n_rows != A.n_cols:
            raise ValueError("matrix must be square")
        if decomp.n != A.n_rows:
            raise ValueError("decomposition size does not match matrix")
        decomp.validate()
        n = A.n_rows
        n_sub = decomp.n_subdomains
        at = transpose(A)
        pts = [np.asarray(sub, dtype=np.int64) for sub in decomp.subdomains]
        sub_of = np.full(n, -1, dtype=np.int64)
        for idx, sub in enumerate(pts):
            sub_of[sub] = idx
        prepinned = np.asarray(decomp.prepinned_f, dtype=np.int64)

        eff = np.zeros(n, dtype=np.uint8)
        eff[prepinned] = 1
        global_f = np.zeros(n, dtype=np.uint8)
        global_f[prepinned] = 1
        # Neighbor labels are read from the spliced global F-set: live in
        # multiplicative sweeps, frozen per sweep in additive ones.
        src_f = (
            global_f
            if config.exchange_mode == "multiplicative"
            else global_f.copy()
        )
        gcount = int(prepinned.size)

        n_opt = sum(int(sub.size) for sub in pts)
        steps_per_sweep = config.steps_per_dof_per_sweep * n_opt
        sweeps = config.sweeps
        n_total_steps = sweeps * steps_per_sweep
        alpha = temperature_schedule(config, n_total_steps)

        regs_i = np.zeros(6, dtype=np.int64)
        regs_i[_engine.REG_BEST_COUNT] = gcount
        regs_i[_engine.REG_GCOUNT] = gcount
        seeder = Pcg32(config.seed)
        rng_regs = np.array([seeder.state, seeder.inc], dtype=np.uint64)

        state = cls(
            A=A,
            decomp=decomp,
            config=config,
            backend=_resolve_backend(backend),
            alpha=alpha,
            sweeps=sweeps,
            n_total_steps=n_total_steps,
            pts=pts,
            ap=A.row_offsets,
            aj=A.col_indices,
            ax=np.abs(A.values),
            tp=at.row_offsets,
            tj=at.col_indices,
            tx=np.abs(at.values),
            diag_abs=np.abs(A.diagonal()),
            sub_of=sub_of,
            eff=eff,
            src_f=src_f,
            global_f=global_f,
            best_f=global_f.copy(),
            visited=np.zeros(n_sub, dtype=np.uint8),
            n_bar=np.zeros(n_sub, dtype=np.int64),
            z_sub=np.zeros(n_sub, dtype=np.int64),
            fsum=np.zeros(n, dtype=np.float64),
            sat=np.zeros(n, dtype=np.uint8),
            member=np.zeros(n, dtype=np.uint8),
            omega_stamp=np.zeros(n, dtype=np.int64),
            closure_stamp=np.zeros(n, dtype=np.int64),
            closure_list=np.zeros(n, dtype=np.int64),
            save_stamp=np.zeros(n, dtype=np.int64),
            save_rows=np.zeros(n, dtype=np.int64),
            save_fsum=np.zeros(n, dtype=np.float64),
            save_sat=np.zeros(n, dtype=np.uint8),
            spl_stamp=np.zeros(n, dtype=np.int64),
            spl_list=np.zeros(n, dtype=np.int64),
            sel_buf=np.zeros(max(2 * (config.x + config.y), 1), dtype=np.int64),
            f_buf=np.zeros(n, dtype=np.int64),
            c_buf=np.zeros(n, dtype=np.int64),
            trace_step=np.zeros(n + 8, dtype=np.int64),
            trace_size=np.zeros(n + 8, dtype=np.int64),
            trace_temp=np.zeros(n + 8, dtype=np.float64),
            regs_f=np.array([config.t_initial], dtype=np.float64),
            regs_i=regs_i,
            rng_regs=rng_regs,
        )
        state.trace.append((0, config.t_initial, gcount, 0))
        return state

    # -- convenience views ------------------------------------------------

    @property
    def temperature(self) -> float:
        return float(self.regs_f[0])

    @property
    def global_step(self) -> int:
        return int(self.regs_i[_engine.REG_GLOBAL_STEP])

    @property
    def best_f_size(self) -> int:
        return int(self.regs_i[_engine.REG_BEST_COUNT])

    @property
    def splice_skips(self) -> int:
        return int(self.regs_i[_engine.REG_SPLICE_SKIPS])

    @property
    def f_global(self) -> np.ndarray:
        """Indices of the accumulated feasible global F-set."""
        return np.flatnonzero(self.global_f).astype(np.int64)

    @property
    def best_f_indices(self) -> np.ndarray:
        return np.flatnonzero(self.best_f).astype(np.int64)

    def f_k(self, k: int) -> np.ndarray:
        """Current tentative F-points of subdomain ``k``."""
        sub = self.pts[k]
        return sub[self.eff[sub] != 0]

    def c_k(self, k: int) -> np.ndarray:
        sub = self.pts[k]
        return sub[self.eff[sub] == 0]

    # -- reference-path mutations -----------------------------------------

    def set_local(self, k: int, f_new: Iterable[int]) -> None:
        """Replace subdomain ``k``'s tentative F-set with ``f_new``."""
        sub = self.pts[k]
        f_new = np.asarray(sorted(int(p) for p in f_new), dtype=np.int64)
        if f_new.size and not np.isin(f_new, sub).all():
            raise ValueError("tentative F-points must lie in the subdomain")
        self.eff[sub] = 0
        self.eff[f_new] = 1

    def try_splice(self, k: int) -> bool:
        """Offer subdomain ``k``'s labels to the global splitting.

        The candidate replaces the subdomain's slice of the global F-set.
        Every row whose sum can have changed, plus every candidate F-row
        of the subdomain, is re-checked against the dominance threshold;
        an infeasible candidate is discarded and counted, keeping the
        global splitting feasible at all times.
        """
        sub = self.pts[k]
        cand = self.global_f.copy()
        cand[sub] = self.eff[sub]
        changed = sub[self.eff[sub] != self.global_f[sub]]
        rows = set(int(p) for p in sub)
        for p in changed:
            lo, hi = int(self.tp[p]), int(self.tp[p + 1])
            rows.update(int(i) for i in self.tj[lo:hi])
        theta = self.config.theta
        for i in sorted(rows):
            if not cand[i]:
                continue
            lo, hi = int(self.ap[i]), int(self.ap[i + 1])
            cols = self.aj[lo:hi]
            total = float(np.sum(self.ax[lo:hi][cand[cols] != 0]))
            if self.diag_abs[i] < theta * total:
                self.regs_i[_engine.REG_SPLICE_SKIPS] += 1
                return False
        delta = int(cand[sub].sum()) - int(self.global_f[sub].sum())
        self.global_f[sub] = cand[sub]
        gcount = int(self.regs_i[_engine.REG_GCOUNT]) + delta
        self.regs_i[_engine.REG_GCOUNT] = gcount
        if gcount > int(self.regs_i[_engine.REG_BEST_COUNT]):
            self.regs_i[_engine.REG_BEST_COUNT] = gcount
            self.best_f[:] = self.global_f
            self.trace.append(
                (self.global_step, self.temperature, gcount, self.current_sweep)
            )
        return True

    def drain_kernel_trace(self) -> None:
        """Move improvement events logged by the kernel into the trace."""
        total = int(self.regs_i[_engine.REG_TRACE_LEN])
        for idx in range(self._trace_drained, total):
            self.trace.append(
                (
                    int(self.trace_step[idx]),
                    float(self.trace_temp[idx]),
                    int(self.trace_size[idx]),
                    self.current_sweep,
                )
            )
        self._trace_drained = total


def anneal_subdomain(
    A: SparseMatrix,
    decomp: SubdomainDecomposition,
    k: int,
    state: AnnealState,
    config: AnnealConfig,
    n_steps: int,
) -> AnnealState:
    """Run ``n_steps`` annealing steps on subdomain ``k`` in place."""
    if not 0 <= k < decomp.n_subdomains:
        raise IndexError(f"subdomain index {k} out of range")
    if n_steps < 0:
        raise ValueError("step count must be nonnegative")
    state.backend.visit(
        state.ap, state.aj, state.ax, state.tp, state.tj, state.tx,
        state.diag_abs,
        state.sub_of,
        state.eff, state.src_f, state.global_f, state.best_f,
        state.visited, state.n_bar, state.z_sub,
        state.fsum, state.sat, state.member,
        state.omega_stamp, state.closure_stamp, state.closure_list,
        state.save_stamp, state.save_rows, state.save_fsum, state.save_sat,
        state.spl_stamp, state.spl_list,
        state.sel_buf, state.f_buf, state.c_buf,
        state.trace_step, state.trace_size, state.trace_temp,
        state.regs_f, state.regs_i, state.rng_regs,
        state.pts[k], k, n_steps, config.theta, state.alpha,
        config.x, config.y,
    )
    state.drain_kernel_trace()
    return state


def sa_coarsen(
    A: SparseMatrix,
    decomp: SubdomainDecomposition,
    config: AnnealConfig,
    backend: Optional[str] = None,
) -> Tuple[CfSplitting, List[TraceSample]]:
    """Anneal a C/F splitting of ``A`` over the given decomposition.

    Sweeps the subdomains in the decomposition's order, each visit running
    ``steps_per_dof_per_sweep * |subdomain|`` steps, until the step budget
    is exhausted.  Returns the best feasible splitting seen (pinned
    F-points are always retained) and the trace of improvement samples.

    A zero step budget returns the pinned-points-only splitting.
    """
    state = AnnealState.create(A, decomp, config, backend)
    for sweep in range(1, state.sweeps + 1):
        state.current_sweep = sweep
        if config.exchange_mode == "additive":
            np.copyto(state.src_f, state.global_f)
        for k in decomp.sweep_order:
            n_steps = config.steps_per_dof_per_sweep * int(state.pts[k].size)
            anneal_subdomain(A, decomp, k, state, config, n_steps)
        state.trace.append(
            (state.global_step, state.temperature, state.best_f_size, sweep)
        )
    splitting = CfSplitting.from_f_indices(A.n_rows, state.best_f_indices)
    if not dominance_check(A, splitting, config.theta):
        raise InfeasibleSplittingError(
            "annealed splitting violates the dominance threshold; "
            "check that pinned F-points are diagonally dominant"
        )
    return splitting, state.trace
