"""Reference implementations of the annealing move and scoring rules.

Everything here favors clarity over speed: plain loops, explicit set
arithmetic, one function per rule.  The optimized engines implement the
same semantics with incremental bookkeeping; the tests hold them to the
behavior defined in this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from ..sparse import SparseMatrix
from .rng import Pcg32


@dataclass(frozen=True)
class HaloView:
    """A subdomain's surroundings as seen during one visit.

    ``halo`` holds the points outside the subdomain that its rows couple
    to, and ``halo_f`` flags the ones treated as F when scoring: pinned
    points, tentative F-points of already-visited subdomains, and every
    point of a not-yet-visited subdomain (the pessimistic assumption that
    keeps local decisions safe before neighbors are optimized).
    """

    subdomain: int
    interior: np.ndarray
    halo: np.ndarray
    halo_f: np.ndarray

    @property
    def halo_f_indices(self) -> np.ndarray:
        return self.halo[self.halo_f != 0]


def halo_assumptions(A: SparseMatrix, decomp, k: int, state) -> HaloView:
    """Build the halo of subdomain ``k`` and its assumed F-labels.

    ``state`` supplies ``sub_of`` (owning subdomain per point, -1 for
    pinned points), ``visited`` flags, and ``src_f``, the spliced global
    F-set that visited neighbors contribute their labels from.
    """
    interior = np.asarray(decomp.subdomains[k], dtype=np.int64)
    inside = np.zeros(A.n_rows, dtype=bool)
    inside[interior] = True
    seen: set[int] = set()
    for p in interior:
        cols, _ = A.row(int(p))
        for j in cols:
            if not inside[j]:
                seen.add(int(j))
    halo = np.array(sorted(seen), dtype=np.int64)
    flags = np.zeros(halo.size, dtype=np.uint8)
    for t, j in enumerate(halo):
        owner = int(state.sub_of[j])
        if owner < 0:
            flags[t] = 1
        elif state.visited[owner]:
            flags[t] = state.src_f[j]
        else:
            flags[t] = 1
    return HaloView(subdomain=k, interior=interior, halo=halo, halo_f=flags)


def fitness(
    A: SparseMatrix,
    f_bar: Iterable[int],
    theta: float,
    tentative_f: Optional[Iterable[int]] = None,
) -> int:
    """Count the rows of ``f_bar`` that satisfy the dominance threshold.

    Row ``i`` counts when ``|A_ii| >= theta * sum_{j in F} |A_ij|`` where
    the sum runs over the tentative global F-set (``tentative_f``, or
    ``f_bar`` itself when the scored rows are the whole F-set, as in a
    single-subdomain run with no halo).
    """
    rows = sorted(int(i) for i in f_bar)
    in_f = np.zeros(A.n_cols, dtype=bool)
    if tentative_f is None:
        in_f[rows] = True
    else:
        in_f[np.fromiter((int(j) for j in tentative_f), dtype=np.int64)] = True
    diag = np.abs(A.diagonal())
    count = 0
    for i in rows:
        cols, vals = A.row(i)
        total = 0.0
        for j, a in zip(cols, vals):
            if in_f[j]:
                total += abs(a)
        if diag[i] >= theta * total:
            count += 1
    return count


def swap_fc(
    f_k: Sequence[int],
    c_k: Sequence[int],
    n_f: int,
    n_c: int,
    rng: Pcg32,
) -> tuple[np.ndarray, np.ndarray]:
    """Move ``n_c`` points F->C and ``n_f`` points C->F, chosen uniformly.

    Selection is without replacement from the pre-move sets, via partial
    Fisher-Yates over the sorted pools: the ``n_c`` departures from F are
    drawn first, then the ``n_f`` departures from C, one bounded draw per
    pick.  Returns the new ``(f, c)`` as sorted arrays.
    """
    f = np.array(sorted(int(p) for p in f_k), dtype=np.int64)
    c = np.array(sorted(int(p) for p in c_k), dtype=np.int64)
    if n_c > f.size or n_f > c.size:
        raise ValueError("not enough points to move")

    def draw(pool: np.ndarray, count: int) -> list[int]:
        picked = []
        live = pool.size
        for _ in range(count):
            d = rng.bounded(live)
            picked.append(int(pool[d]))
            pool[d] = pool[live - 1]
            live -= 1
        return picked

    to_c = draw(f.copy(), n_c)
    to_f = draw(c.copy(), n_f)
    f_new = (set(f.tolist()) - set(to_c)) | set(to_f)
    c_new = (set(c.tolist()) - set(to_f)) | set(to_c)
    return (
        np.array(sorted(f_new), dtype=np.int64),
        np.array(sorted(c_new), dtype=np.int64),
    )


def acceptance_probability(z: int, z_tilde: int, temperature: float) -> float:
    """Metropolis rule: 1 for non-worsening moves, exp(-loss/T) otherwise."""
    if z_tilde >= z:
        return 1.0
    return math.exp(-(z - z_tilde) / temperature)


def accept_step(
    z: int,
    z_tilde: int,
    temperature: float,
    feasible: bool,
    state,
    k: int,
    f_new: Sequence[int],
    rng: Pcg32,
) -> bool:
    """Decide one proposed move and record its consequences.

    Non-worsening moves are taken outright (no draw consumed); worsening
    ones survive with probability ``exp(-(z - z_tilde)/T)``.  ``feasible``
    asserts that every scored row passed the threshold (``z_tilde`` equals
    the scored-row count); such states additionally raise the subdomain's
    best-feasible mark and are offered to the global splitting, which
    accepts them only after a fresh dominance check of every affected row.
    """
    if z_tilde >= z:
        accepted = True
    else:
        accepted = rng.uniform() < acceptance_probability(z, z_tilde, temperature)
    if accepted:
        state.set_local(k, f_new)
        if feasible and z_tilde >= state.n_bar[k]:
            state.n_bar[k] = z_tilde
            state.try_splice(k)
    return accepted
