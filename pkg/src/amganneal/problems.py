"""Test-problem generators: structured FD/FE Laplacians, rotated anisotropic
diffusion, upwind convection-diffusion, and P1 assembly on triangulations.

Structured grids use row-major DoF ordering (x fastest) and eliminated
Dirichlet boundaries, so N produces N*N unknowns. The pure-Laplacian and
anisotropic generators omit the common 1/h^2 row factor (integer/rational
stencils; dominance ratios and convergence factors are unchanged by a global
scaling). Convection-diffusion keeps the physical eps/h^2 and 1/h scaling
because the eps-vs-h balance is the point of that problem family.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .sparse import SparseMatrix

__all__ = [
    "AnisotropyParams",
    "TriMesh",
    "gen_fd_laplacian_1d",
    "gen_fd_laplacian_5pt",
    "gen_fe_bilinear_9pt",
    "gen_identity",
    "gen_anisotropic",
    "gen_convection_diffusion",
    "assemble_p1",
    "load_mesh",
    "save_mesh",
]


@dataclass(frozen=True)
class AnisotropyParams:
    """Diffusion tensor K = Q diag(delta, 1) Q^T with rotation angle in radians.

    angle = pi/2 recovers -u_xx - delta*u_yy; delta = 1 is isotropic.
    """

    delta: float = 1.0
    angle: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.delta <= 1.0):
            raise ValueError(f"delta must be in (0, 1], got {self.delta}")

    def tensor(self):
        c, s = np.cos(self.angle), np.sin(self.angle)
        q = np.array([[c, -s], [s, c]])
        return q @ np.diag([self.delta, 1.0]) @ q.T


def _grid_from_stencil(N, stencil):
    """Assemble an N*N-unknown operator from {(dx, dy): weight} with eliminated
    Dirichlet boundary (off-grid neighbors dropped)."""
    rows, cols, vals = [], [], []
    for (dx, dy), w in stencil.items():
        if w == 0.0:
            continue
        ix = np.arange(N)
        iy = np.arange(N)
        gx, gy = np.meshgrid(ix, iy, indexing="xy")
        jx, jy = gx + dx, gy + dy
        ok = (jx >= 0) & (jx < N) & (jy >= 0) & (jy < N)
        rows.append((gy[ok] * N + gx[ok]).ravel())
        cols.append((jy[ok] * N + jx[ok]).ravel())
        vals.append(np.full(ok.sum(), w))
    return SparseMatrix.from_coo(
        N * N, N * N, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    )


def gen_fd_laplacian_5pt(N: int) -> SparseMatrix:
    """Five-point FD Laplacian on an N x N interior grid (stencil {4, -1})."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return _grid_from_stencil(
        N, {(0, 0): 4.0, (1, 0): -1.0, (-1, 0): -1.0, (0, 1): -1.0, (0, -1): -1.0}
    )


def gen_fd_laplacian_1d(n: int) -> SparseMatrix:
    """Tridiagonal (-1, 2, -1) operator on n interior points of a line."""
    if n < 1:
        raise ValueError("n must be >= 1")
    idx = np.arange(n)
    rows = np.concatenate([idx, idx[:-1], idx[1:]])
    cols = np.concatenate([idx, idx[1:], idx[:-1]])
    vals = np.concatenate([np.full(n, 2.0), np.full(2 * (n - 1), -1.0)])
    return SparseMatrix.from_coo(n, n, rows, cols, vals)


def gen_identity(n: int) -> SparseMatrix:
    """Identity matrix; every point passes the dominance check on its own."""
    if n < 1:
        raise ValueError("n must be >= 1")
    idx = np.arange(n)
    return SparseMatrix.from_coo(n, n, idx, idx, np.ones(n))


def _bilinear_element_stiffness(K):
    """4x4 stiffness of one bilinear quad element (unit cell, 2x2 Gauss),
    local node order SW, SE, NE, NW. h-independent in 2D."""
    g = 1.0 / np.sqrt(3.0)
    pts = [(-g, -g), (g, -g), (g, g), (-g, g)]
    # dN/dxi, dN/deta on [-1,1]^2; the (2/h) jacobian factor and the h^2/4 area
    # element cancel to 1 in 2D up to the constant 1/4 carried below.
    ke = np.zeros((4, 4))
    for xi, eta in pts:
        dxi = 0.25 * np.array([-(1 - eta), (1 - eta), (1 + eta), -(1 + eta)])
        deta = 0.25 * np.array([-(1 - xi), -(1 + xi), (1 + xi), (1 - xi)])
        grads = np.stack([dxi, deta])  # 2 x 4, in units of 2/h
        ke += grads.T @ K @ grads
    return ke


def gen_fe_bilinear_9pt(N: int) -> SparseMatrix:
    """Bilinear FE Laplacian on an N x N interior grid (center 8/3, neighbors -1/3)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return gen_anisotropic(N, AnisotropyParams(1.0, 0.0), scheme="FE")


def gen_anisotropic(N: int, p: AnisotropyParams, scheme: str = "FD") -> SparseMatrix:
    """Rotated anisotropic diffusion -div(K grad u) on an N x N interior grid.

    scheme="FD": central differences, mixed term by the 4-point cross stencil.
    scheme="FE": bilinear quads with 2x2 Gauss quadrature.
    Both are symmetric.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    K = p.tensor()
    k11, k12, k22 = K[0, 0], K[0, 1], K[1, 1]
    if scheme.upper() == "FD":
        stencil = {
            (0, 0): 2.0 * (k11 + k22),
            (1, 0): -k11,
            (-1, 0): -k11,
            (0, 1): -k22,
            (0, -1): -k22,
            (1, 1): -k12 / 2.0,
            (-1, -1): -k12 / 2.0,
            (1, -1): k12 / 2.0,
            (-1, 1): k12 / 2.0,
        }
        return _grid_from_stencil(N, stencil)
    if scheme.upper() == "FE":
        ke = _bilinear_element_stiffness(K)
        # Stencil entries from the four elements incident to an interior node;
        # local order SW=0, SE=1, NE=2, NW=3.
        stencil = {
            (0, 0): ke[0, 0] + ke[1, 1] + ke[2, 2] + ke[3, 3],
            (1, 0): ke[0, 1] + ke[3, 2],
            (-1, 0): ke[1, 0] + ke[2, 3],
            (0, 1): ke[0, 3] + ke[1, 2],
            (0, -1): ke[3, 0] + ke[2, 1],
            (1, 1): ke[0, 2],
            (-1, -1): ke[2, 0],
            (-1, 1): ke[1, 3],
            (1, -1): ke[3, 1],
        }
        return _grid_from_stencil(N, stencil)
    raise ValueError(f"unknown scheme {scheme!r} (expected 'FD' or 'FE')")


def gen_convection_diffusion(N: int, eps: float, b) -> SparseMatrix:
    """-eps*Lap(u) + b.grad(u) with first-order upwind convection.

    Diffusion is eps/h^2 times the 5-point stencil, convection is upwinded per
    component sign and scaled by 1/h, h = 1/(N+1). Nonsymmetric for b != 0.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if eps <= 0:
        raise ValueError("eps must be positive")
    b1, b2 = float(b[0]), float(b[1])
    h = 1.0 / (N + 1)
    d = eps / (h * h)
    stencil = {
        (0, 0): 4.0 * d,
        (1, 0): -d,
        (-1, 0): -d,
        (0, 1): -d,
        (0, -1): -d,
    }
    if b1 >= 0:
        stencil[(0, 0)] += b1 / h
        stencil[(-1, 0)] += -b1 / h
    else:
        stencil[(0, 0)] += -b1 / h
        stencil[(1, 0)] += b1 / h
    if b2 >= 0:
        stencil[(0, 0)] += b2 / h
        stencil[(0, -1)] += -b2 / h
    else:
        stencil[(0, 0)] += -b2 / h
        stencil[(0, 1)] += b2 / h
    return _grid_from_stencil(N, stencil)


@dataclass
class TriMesh:
    """Triangulation: node coordinates, triangle index triples, boundary node set."""

    nodes: np.ndarray
    triangles: np.ndarray
    boundary_nodes: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=np.float64).reshape(-1, 2)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        self.boundary_nodes = np.unique(np.asarray(self.boundary_nodes, dtype=np.int64))
        n = len(self.nodes)
        if self.triangles.size and (self.triangles.min() < 0 or self.triangles.max() >= n):
            raise ValueError("triangle index out of range")
        if self.boundary_nodes.size and (
            self.boundary_nodes.min() < 0 or self.boundary_nodes.max() >= n
        ):
            raise ValueError("boundary node index out of range")
        # Orient consistently (positive signed area); zero area is an error.
        for t, (i, j, k) in enumerate(self.triangles):
            a = _signed_area(self.nodes[i], self.nodes[j], self.nodes[k])
            if a == 0.0:
                raise ValueError(f"triangle {t} ({i},{j},{k}) has zero area")
            if a < 0.0:
                self.triangles[t] = (i, k, j)

    @property
    def n_nodes(self):
        return len(self.nodes)


def _signed_area(p0, p1, p2):
    return 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))


def _p1_element_stiffness(p0, p1, p2, K):
    area = _signed_area(p0, p1, p2)
    b = np.array([p1[1] - p2[1], p2[1] - p0[1], p0[1] - p1[1]])
    c = np.array([p2[0] - p1[0], p0[0] - p2[0], p1[0] - p0[0]])
    grads = np.stack([b, c]) / (2.0 * area)  # 2 x 3
    return area * (grads.T @ K @ grads)


def assemble_p1(mesh: TriMesh, p: AnisotropyParams) -> SparseMatrix:
    """P1 stiffness matrix for -div(K grad u) with Dirichlet rows/columns
    eliminated; unknowns are the non-boundary nodes in node-index order."""
    K = p.tensor()
    n = mesh.n_nodes
    keep = np.ones(n, dtype=bool)
    keep[mesh.boundary_nodes] = False
    new_id = -np.ones(n, dtype=np.int64)
    new_id[keep] = np.arange(keep.sum())
    rows, cols, vals = [], [], []
    for t, tri in enumerate(mesh.triangles):
        ke = _p1_element_stiffness(*(mesh.nodes[v] for v in tri), K)
        for a in range(3):
            ia = tri[a]
            if not keep[ia]:
                continue
            for bq in range(3):
                jb = tri[bq]
                if not keep[jb]:
                    continue
                rows.append(new_id[ia])
                cols.append(new_id[jb])
                vals.append(ke[a, bq])
    m = int(keep.sum())
    return SparseMatrix.from_coo(m, m, rows, cols, vals)


def load_mesh(path) -> TriMesh:
    """Parse the mesh text format: 'nodes <count>' then x y lines,
    'triangles <count>' then three 0-based indices per line,
    'boundary <count>' then one node index per line."""
    path = str(path)
    with open(path) as fh:
        lines = fh.read().splitlines()

    pos = 0

    def fail(msg, lineno=None):
        raise ValueError(f"{path}:{lineno if lineno is not None else pos}: {msg}")

    def next_content():
        nonlocal pos
        while pos < len(lines):
            pos += 1
            text = lines[pos - 1].strip()
            if text and not text.startswith("#"):
                return text
        return None

    def section(name):
        text = next_content()
        if text is None:
            fail(f"missing '{name} <count>' line", len(lines))
        parts = text.split()
        if len(parts) != 2 or parts[0] != name or not parts[1].isdigit():
            fail(f"expected '{name} <count>', got {text!r}")
        return int(parts[1])

    n_nodes = section("nodes")
    nodes = np.empty((n_nodes, 2))
    for i in range(n_nodes):
        text = next_content()
        if text is None:
            fail("unexpected end of file in nodes", len(lines))
        parts = text.split()
        if len(parts) != 2:
            fail(f"expected 'x y', got {text!r}")
        try:
            nodes[i] = (float(parts[0]), float(parts[1]))
        except ValueError:
            fail(f"cannot parse coordinates {text!r}")

    n_tri = section("triangles")
    tris = np.empty((n_tri, 3), dtype=np.int64)
    for i in range(n_tri):
        text = next_content()
        if text is None:
            fail("unexpected end of file in triangles", len(lines))
        parts = text.split()
        if len(parts) != 3:
            fail(f"expected 'i j k', got {text!r}")
        try:
            tris[i] = [int(tok) for tok in parts]
        except ValueError:
            fail(f"cannot parse triangle {text!r}")

    n_bnd = section("boundary")
    bnd = np.empty(n_bnd, dtype=np.int64)
    for i in range(n_bnd):
        text = next_content()
        if text is None:
            fail("unexpected end of file in boundary", len(lines))
        try:
            bnd[i] = int(text.split()[0])
        except ValueError:
            fail(f"cannot parse boundary index {text!r}")

    try:
        return TriMesh(nodes, tris, bnd)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None


def save_mesh(mesh: TriMesh, path) -> None:
    with open(str(path), "w") as fh:
        fh.write(f"nodes {mesh.n_nodes}\n")
        for x, y in mesh.nodes:
            fh.write(f"{x:.17g} {y:.17g}\n")
        fh.write(f"triangles {len(mesh.triangles)}\n")
        for i, j, k in mesh.triangles:
            fh.write(f"{i} {j} {k}\n")
        fh.write(f"boundary {len(mesh.boundary_nodes)}\n")
        for i in mesh.boundary_nodes:
            fh.write(f"{i}\n")
