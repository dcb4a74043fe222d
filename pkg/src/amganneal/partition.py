"""Coarse/fine partitioning: the greedy baseline, subdomain decompositions
(geometric tiles and Lloyd aggregation), by-hand benchmark splittings for the
structured Laplacians, a brute-force optimal-F oracle, and splitting file I/O.

The optimization problem throughout: maximize |F| subject to
|A_ii| >= theta * sum_{j in F} |A_ij| for every i in F (strict floating-point
comparison, no tolerance).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .sparse import C, F, CfSplitting, SparseMatrix, dominance_check, transpose

__all__ = [
    "SubdomainDecomposition",
    "BruteForceResult",
    "greedy_coarsen",
    "prepin_safe_f",
    "geometric_blocks",
    "lloyd_aggregate",
    "by_hand_fd",
    "by_hand_fe",
    "brute_force_optimal_f",
    "save_splitting",
    "load_splitting",
]


@dataclass
class SubdomainDecomposition:
    """Disjoint subdomains plus a sweep order and optional color grouping.

    prepinned_f points belong to no subdomain; they are unconditionally safe
    F-points excluded from optimization. color_groups, when present, lists
    subdomain ids per color in sweep order (same-color geometric tiles are
    mutually non-adjacent for tile dimensions >= 2).
    """

    n: int
    subdomains: list
    sweep_order: list
    prepinned_f: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    color_groups: list | None = None

    def validate(self):
        seen = np.zeros(self.n, dtype=np.int8)
        for omega in self.subdomains:
            seen[omega] += 1
        seen[self.prepinned_f] += 1
        if not np.all(seen == 1):
            raise ValueError("subdomains and prepinned_f must partition the index set")
        if sorted(self.sweep_order) != list(range(len(self.subdomains))):
            raise ValueError("sweep_order must be a permutation of subdomain ids")

    @property
    def n_subdomains(self):
        return len(self.subdomains)


@dataclass(frozen=True)
class BruteForceResult:
    best_f: np.ndarray
    best_size: int
    feasible_count: int


def greedy_coarsen(A: SparseMatrix, theta: float) -> CfSplitting:
    """Greedy baseline: repeatedly move the point of smallest dominance ratio
    theta_hat_i = |A_ii| / sum_{j in F u U} |A_ij| to C until every remaining
    point satisfies theta_hat_i >= theta. Lowest index wins argmin ties."""
    if theta <= 0.5:
        raise ValueError("theta must exceed 1/2")
    n = A.n_rows
    diag = np.abs(A.diagonal())
    if np.any(diag == 0.0):
        raise ValueError(f"zero diagonal at row {int(np.argmin(diag != 0.0))}")
    sums = np.zeros(n)
    np.add.at(sums, np.repeat(np.arange(n), np.diff(A.row_offsets)), np.abs(A.values))
    At = transpose(A)

    s = CfSplitting(n)
    theta_hat = diag / sums
    s.labels[theta_hat >= theta] = F
    # argmin key: +inf once a point leaves U
    key = np.where(s.labels == F, np.inf, theta_hat)
    for _ in range(n):
        j = int(np.argmin(key))
        if key[j] == np.inf:
            break
        s.labels[j] = C
        key[j] = np.inf
        cols, vals = At.row(j)
        for i, a_ij in zip(cols.tolist(), vals.tolist()):
            if i == j or s.labels[i] == C:
                continue
            sums[i] -= abs(a_ij)
            theta_hat[i] = diag[i] / sums[i]
            if s.labels[i] != F:
                if theta_hat[i] >= theta:
                    s.labels[i] = F
                    key[i] = np.inf
                else:
                    key[i] = theta_hat[i]
    assert dominance_check(A, s.f_indices(), theta)
    return s


def prepin_safe_f(A: SparseMatrix, theta: float) -> np.ndarray:
    """Rows whose full-row dominance |A_ii| >= theta * sum_{j} |A_ij| already
    holds; such points are safe F-points in any splitting."""
    if theta <= 0.5:
        raise ValueError("theta must exceed 1/2")
    n = A.n_rows
    diag = np.abs(A.diagonal())
    sums = np.zeros(n)
    np.add.at(sums, np.repeat(np.arange(n), np.diff(A.row_offsets)), np.abs(A.values))
    return np.flatnonzero(diag >= theta * sums)


def global_subdomain(A: SparseMatrix, theta: float) -> SubdomainDecomposition:
    """One subdomain holding every non-prepinned point."""
    prepinned = prepin_safe_f(A, theta)
    remaining = np.setdiff1d(np.arange(A.n_rows), prepinned)
    subdomains = [remaining.tolist()] if remaining.size else []
    sweep_order = [0] if remaining.size else []
    return SubdomainDecomposition(A.n_rows, subdomains, sweep_order, prepinned)


def geometric_blocks(N: int, block, A: SparseMatrix, theta: float) -> SubdomainDecomposition:
    """Tile the non-prepinned points of an N x N row-major grid into
    block-sized rectangles (right/bottom remainders smaller), four-colored by
    tile parity; sweep order is color by color, raster within a color."""
    n = A.n_rows
    if n != N * N:
        raise ValueError(f"matrix has {n} rows, expected N*N = {N * N}")
    br, bc = int(block[0]), int(block[1])
    if br < 1 or bc < 1:
        raise ValueError("block dimensions must be >= 1")
    prepinned = prepin_safe_f(A, theta)
    remaining = np.setdiff1d(np.arange(n), prepinned)
    if remaining.size == 0:
        return SubdomainDecomposition(n, [], [], prepinned, color_groups=[])
    iy, ix = remaining // N, remaining % N
    ty = (iy - iy.min()) // br
    tx = (ix - ix.min()) // bc
    n_tx = int(tx.max()) + 1
    tiles = {}
    for p, a, b in zip(remaining.tolist(), ty.tolist(), tx.tolist()):
        tiles.setdefault((a, b), []).append(p)
    keys = sorted(tiles)
    subdomains = [np.array(tiles[k], dtype=np.int64) for k in keys]
    order = sorted(
        range(len(keys)), key=lambda i: (2 * (keys[i][0] % 2) + keys[i][1] % 2, keys[i])
    )
    groups = []
    for color, ids in itertools.groupby(order, key=lambda i: 2 * (keys[i][0] % 2) + keys[i][1] % 2):
        groups.append(list(ids))
    del n_tx
    return SubdomainDecomposition(n, subdomains, order, prepinned, color_groups=groups)


def _multi_source_bfs(adj_rows, adj_offsets, live, centers):
    """Grow regions from centers over the structural graph restricted to live
    points; each point inherits the aggregate of its discoverer. Frontier is
    processed in ascending index order, so ties are deterministic."""
    n = len(live)
    agg = np.full(n, -1, dtype=np.int64)
    frontier = sorted(int(c) for c in centers)
    for a, c in enumerate(frontier):
        agg[c] = a
    while frontier:
        nxt = []
        for p in frontier:
            for q in adj_rows[adj_offsets[p] : adj_offsets[p + 1]].tolist():
                if q != p and live[q] and agg[q] < 0:
                    agg[q] = agg[p]
                    nxt.append(q)
        frontier = sorted(nxt)
    return agg


def lloyd_aggregate(
    A: SparseMatrix, avg_size: int, seed, prepin_theta: float | None = None
) -> SubdomainDecomposition:
    """Lloyd aggregation on the unit-distance graph of A: assign points to the
    nearest center by BFS region growing, re-center each aggregate at a point
    of maximum hop distance from its boundary (lowest index on ties), repeat
    until stable or 20 iterations. Unreached points (disconnected from every
    center) become singleton subdomains.

    prepin_theta, when given, first removes unconditionally safe F rows
    (prepin_safe_f) and aggregates only the remainder."""
    if avg_size < 1:
        raise ValueError("avg_size must be >= 1")
    n = A.n_rows
    prepinned = (
        prepin_safe_f(A, prepin_theta) if prepin_theta is not None else np.empty(0, np.int64)
    )
    live = np.ones(n, dtype=bool)
    live[prepinned] = False
    nodes = np.flatnonzero(live)
    if nodes.size == 0:
        return SubdomainDecomposition(n, [], [], prepinned)
    s = min(math.ceil(nodes.size / avg_size), nodes.size)
    rng = np.random.default_rng(seed)
    centers = np.sort(nodes[rng.choice(nodes.size, size=s, replace=False)])

    adj_rows, adj_offsets = A.col_indices, A.row_offsets
    agg = _multi_source_bfs(adj_rows, adj_offsets, live, centers)
    for _ in range(20):
        new_centers = []
        for a in range(s):
            members = np.flatnonzero(agg == a)
            boundary = [
                p
                for p in members.tolist()
                if any(
                    q != p and live[q] and agg[q] != a
                    for q in adj_rows[adj_offsets[p] : adj_offsets[p + 1]].tolist()
                )
            ]
            if not boundary:
                new_centers.append(int(centers[a]))
                continue
            dist = {p: 0 for p in boundary}
            frontier = sorted(boundary)
            d = 0
            while frontier:
                d += 1
                nxt = []
                for p in frontier:
                    for q in adj_rows[adj_offsets[p] : adj_offsets[p + 1]].tolist():
                        if q != p and agg[q] == a and q not in dist:
                            dist[q] = d
                            nxt.append(q)
                frontier = sorted(nxt)
            dmax = max(dist.values())
            new_centers.append(min(p for p, dp in dist.items() if dp == dmax))
        new_centers = np.sort(np.array(new_centers, dtype=np.int64))
        if np.array_equal(new_centers, centers):
            break
        centers = new_centers
        agg = _multi_source_bfs(adj_rows, adj_offsets, live, centers)

    subdomains = [np.flatnonzero(agg == a) for a in range(s)]
    subdomains = [omega for omega in subdomains if omega.size]
    for p in np.flatnonzero(live & (agg < 0)).tolist():
        subdomains.append(np.array([p], dtype=np.int64))
    return SubdomainDecomposition(n, subdomains, list(range(len(subdomains))), prepinned)


def _shift_or(mask, dy, dx):
    out = np.zeros_like(mask)
    N = mask.shape[0]
    ys = slice(max(dy, 0), N + min(dy, 0))
    xs = slice(max(dx, 0), N + min(dx, 0))
    yd = slice(max(-dy, 0), N + min(-dy, 0))
    xd = slice(max(-dx, 0), N + min(-dx, 0))
    out[yd, xd] = mask[ys, xs]
    return out


def _plus_closed(p, N):
    y, x = p
    cells = [(y, x)]
    for dy, dx in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        if 0 <= y + dy < N and 0 <= x + dx < N:
            cells.append((y + dy, x + dx))
    return cells


def _min_plus_cover(demand, candidates, N, ub):
    """Exact minimum cover of the demand cells by closed plus-neighborhoods
    of candidate cells (deterministic branch and bound). Returns a cover of
    size < ub, or None if none exists."""
    index = {cell: i for i, cell in enumerate(demand)}
    masks = []
    for cand in candidates:
        m = 0
        for cell in _plus_closed(cand, N):
            if cell in index:
                m |= 1 << index[cell]
        masks.append(m)
    coverers = [[] for _ in demand]
    for ci, m in enumerate(masks):
        for di in range(len(demand)):
            if m >> di & 1:
                coverers[di].append(ci)
    best = [None]

    def rec(uncov, chosen, limit):
        if uncov == 0:
            best[0] = list(chosen)
            return len(chosen)
        if len(chosen) + (uncov.bit_count() + 4) // 5 >= limit:
            return limit
        u, pick, fewest = uncov, -1, None
        while u:
            di = (u & -u).bit_length() - 1
            u &= u - 1
            if fewest is None or len(coverers[di]) < fewest:
                fewest, pick = len(coverers[di]), di
        for ci in coverers[pick]:
            chosen.append(ci)
            limit = min(limit, rec(uncov & ~masks[ci], chosen, limit))
            chosen.pop()
        return limit

    rec((1 << len(demand)) - 1, [], ub)
    if best[0] is None:
        return None
    return [candidates[ci] for ci in best[0]]


def _pentomino_lattice(N, coeffs, k, covers_interior):
    a, b = coeffs
    r = np.arange(N)[:, None] * np.ones(N, dtype=np.int64)[None, :]
    c = np.ones(N, dtype=np.int64)[:, None] * np.arange(N)[None, :]
    mask = ((a * r + b * c) % 5 == k) & covers_interior
    return {(int(y), int(x)) for y, x in np.argwhere(mask)}


def _patch_corners(cset, interior, N):
    """Replace the C-points near each corner by an exact minimum re-cover of
    the interior cells they served; the plane-periodic lattice wastes about
    one point per corner, which this recovers."""
    w = min(10, N // 2)
    cset = set(cset)
    for flip_y, flip_x in ((0, 0), (0, 1), (1, 0), (1, 1)):
        def tr(y, x):
            return (N - 1 - y if flip_y else y, N - 1 - x if flip_x else x)

        core = {tr(y, x) for y in range(w - 2) for x in range(w - 2)}
        removed = cset & core
        if not removed:
            continue
        rest = cset - removed
        zone = set(core)
        for p in removed:
            zone.update(_plus_closed(p, N))
        demand = sorted(
            p for p in zone
            if p in interior and not any(q in rest for q in _plus_closed(p, N))
        )
        window = sorted(tr(y, x) for y in range(w) for x in range(w))
        sol = _min_plus_cover(demand, window, N, ub=len(removed))
        if sol is not None:
            cset = rest | set(sol)
    return cset


def by_hand_fd(N: int) -> CfSplitting:
    """Benchmark splitting for the 5-point Laplacian. An interior F-point is
    feasible at theta < 4/7 iff it has a C-point in its closed plus-shaped
    neighborhood; edge and corner rows are safe unconditionally. The C-set is
    therefore a minimum plus-cover of the interior grid: X-pentomino centers
    on a period-5 lattice (a perfect cover of the plane), with the corners
    re-covered exactly, which reaches floor(N^2/5) - 4 points for large N.
    Small grids (N <= 9) are covered exactly by branch and bound."""
    n = N * N
    interior = [(y, x) for y in range(1, N - 1) for x in range(1, N - 1)]
    s = CfSplitting(n)
    s.labels[:] = F
    if not interior:
        return s
    if N <= 9:
        c_cells = _min_plus_cover(interior, interior, N, len(interior) + 1)
    else:
        interior_set = set(interior)
        interior_mask = np.zeros((N, N), dtype=bool)
        interior_mask[1 : N - 1, 1 : N - 1] = True
        covers_interior = interior_mask.copy()
        for dy, dx in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            covers_interior |= _shift_or(interior_mask, dy, dx)
        lower = N * N // 5 - 4 if N >= 18 else 0
        c_cells = None
        for coeffs in ((1, 2), (1, -2), (2, 1), (2, -1)):
            for k in range(5):
                cells = _pentomino_lattice(N, coeffs, k, covers_interior)
                cells = _patch_corners(cells, interior_set, N)
                if c_cells is None or len(cells) < len(c_cells):
                    c_cells = cells
                if len(c_cells) == lower:
                    break
            if c_cells is not None and len(c_cells) == lower:
                break
    for y, x in c_cells:
        s.labels[y * N + x] = C
    return s


def by_hand_fe(N: int) -> CfSplitting:
    """Benchmark splitting for the 9-point FE Laplacian: C-points on two
    (row mod 3, col mod 3) residue classes (two C per 3x3 brick, ideal ratio
    7/9), then a deterministic repair sweep promoting points to C until every
    F-point has at least two C-neighbors in its 8-neighborhood. The class
    pair minimizing the final |C| is selected."""
    r = np.arange(N)[:, None] * np.ones(N, dtype=np.int64)[None, :]
    c = np.ones(N, dtype=np.int64)[:, None] * np.arange(N)[None, :]
    cls = (r % 3) * 3 + c % 3
    eight = [(dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if (dy, dx) != (0, 0)]

    def neighbor_count(c_mask):
        count = np.zeros((N, N), dtype=np.int64)
        for dy, dx in eight:
            count += _shift_or(c_mask, dy, dx)
        return count

    def repaired(c_mask):
        c_mask = c_mask.copy()
        count = neighbor_count(c_mask)
        while True:
            deficient = np.flatnonzero(~c_mask.ravel() & (count.ravel() < 2))
            if deficient.size == 0:
                return c_mask
            py, px = divmod(int(deficient[0]), N)
            options = sorted(
                (py + dy) * N + (px + dx)
                for dy, dx in eight
                if 0 <= py + dy < N and 0 <= px + dx < N and not c_mask[py + dy, px + dx]
            )
            qy, qx = divmod(options[0] if options else py * N + px, N)
            c_mask[qy, qx] = True
            for dy, dx in eight:
                if 0 <= qy + dy < N and 0 <= qx + dx < N:
                    count[qy + dy, qx + dx] += 1
        return c_mask

    best = None
    for a, b in itertools.combinations(range(9), 2):
        c_mask = repaired((cls == a) | (cls == b))
        size = int(c_mask.sum())
        if best is None or size < best[0]:
            best = (size, c_mask)
    s = CfSplitting(N * N)
    s.labels[:] = F
    s.labels[best[1].ravel()] = C
    return s


def brute_force_optimal_f(A: SparseMatrix, theta: float) -> BruteForceResult:
    """Exhaustive maximizer of |F| over all 2^n subsets (Gray-code order with
    incremental constraint sums); ties resolve to the lexicographically
    smallest F. Also counts every feasible subset, the empty set included."""
    n = A.n_rows
    if n > 24:
        raise ValueError(f"n = {n} exceeds the exhaustive-search cap of 24")
    if theta <= 0.5:
        raise ValueError("theta must exceed 1/2")
    diag = np.abs(A.diagonal()).tolist()
    At = transpose(A)
    col = []
    for j in range(n):
        rows, vals = At.row(j)
        col.append([(int(i), abs(float(v))) for i, v in zip(rows, vals)])

    in_f = [False] * n
    sums = [0.0] * n
    bad = [False] * n
    n_bad = 0
    cur_size = 0
    best_size = 0
    best = ()
    feasible_count = 1  # the empty set
    for t in range(1, 1 << n):
        j = (t & -t).bit_length() - 1
        entering = not in_f[j]
        in_f[j] = entering
        cur_size += 1 if entering else -1
        touched = {j}
        for i, a in col[j]:
            sums[i] += a if entering else -a
            touched.add(i)
        for i in touched:
            now_bad = in_f[i] and diag[i] < theta * sums[i]
            if now_bad != bad[i]:
                bad[i] = now_bad
                n_bad += 1 if now_bad else -1
        if n_bad == 0:
            feasible_count += 1
            if cur_size > best_size:
                best_size = cur_size
                best = tuple(i for i in range(n) if in_f[i])
            elif cur_size == best_size:
                cand = tuple(i for i in range(n) if in_f[i])
                if cand < best:
                    best = cand
    best_f = np.array(best, dtype=np.int64)
    assert dominance_check(A, best_f, theta)
    return BruteForceResult(best_f, best_size, feasible_count)


def save_splitting(s: CfSplitting, path, *, theta, method, seed=None, provenance=None):
    """Write a finalized splitting as JSON. Deterministic byte output for
    identical inputs (no timestamps)."""
    if not s.finalized:
        raise ValueError("cannot save an unfinalized splitting")
    payload = {
        "format_version": 1,
        "n": int(s.n),
        "theta": float(theta),
        "f_indices": [int(i) for i in s.f_indices()],
        "method": str(method),
        "seed": seed if seed is None else int(seed),
        "provenance": dict(provenance or {}, amganneal_version=__version__),
    }
    with open(str(path), "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_splitting(path):
    """Read a splitting JSON file; returns (CfSplitting, metadata dict)."""
    with open(str(path)) as fh:
        payload = json.load(fh)
    for key in ("format_version", "n", "theta", "f_indices"):
        if key not in payload:
            raise ValueError(f"{path}: missing field {key!r}")
    if payload["format_version"] != 1:
        raise ValueError(f"{path}: unsupported format_version {payload['format_version']}")
    s = CfSplitting.from_f_indices(payload["n"], payload["f_indices"])
    return s, payload
