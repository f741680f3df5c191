"""Sparse-matrix forms of the discrete operators.

Velocity components are discretized on their own face grids with the
boundary (Dirichlet) faces eliminated, so the unknown layouts are:

  u-component: interior vertical faces, shape (nx-1, ny), row-major;
  v-component: interior horizontal faces, shape (nx, ny-1), row-major.

Walls parallel to a component sit half a spacing away from the first
face row; the mirror-ghost elimination puts a 3 on those diagonals.
"""

from __future__ import annotations

import functools

import numpy as np
import scipy.sparse as sp

from .grid import GridSpec


def _tridiag(n: int, h: float, end_diag: float) -> sp.csr_matrix:
    main = np.full(n, 2.0)
    main[0] = main[-1] = end_diag
    off = -np.ones(n - 1)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr") / h**2


@functools.lru_cache(maxsize=32)
def face_stiffness_u(spec: GridSpec) -> sp.csr_matrix:
    """Negative Laplacian on the u-face grid with Dirichlet walls."""
    tx = _tridiag(spec.nx - 1, spec.hx, 2.0)
    ty = _tridiag(spec.ny, spec.hy, 3.0)
    return (sp.kron(tx, sp.identity(spec.ny)) +
            sp.kron(sp.identity(spec.nx - 1), ty)).tocsr()


@functools.lru_cache(maxsize=32)
def face_stiffness_v(spec: GridSpec) -> sp.csr_matrix:
    """Negative Laplacian on the v-face grid with Dirichlet walls."""
    tx = _tridiag(spec.nx, spec.hx, 3.0)
    ty = _tridiag(spec.ny - 1, spec.hy, 2.0)
    return (sp.kron(tx, sp.identity(spec.ny - 1)) +
            sp.kron(sp.identity(spec.nx), ty)).tocsr()


@functools.lru_cache(maxsize=32)
def cell_laplacian_neumann(spec: GridSpec) -> sp.csr_matrix:
    """Negative cell-centered Laplacian with zero-flux walls (PSD)."""
    def t_neumann(n, h):
        main = np.full(n, 2.0)
        main[0] = main[-1] = 1.0
        off = -np.ones(n - 1)
        return sp.diags([off, main, off], [-1, 0, 1], format="csr") / h**2

    return (sp.kron(t_neumann(spec.nx, spec.hx), sp.identity(spec.ny)) +
            sp.kron(sp.identity(spec.nx), t_neumann(spec.ny, spec.hy))).tocsr()


@functools.lru_cache(maxsize=32)
def divergence_matrix(spec: GridSpec) -> sp.csr_matrix:
    """Cells x interior-faces divergence, matching grid.divergence.

    Acts on the stacked vector [u_interior.ravel(), v_interior.ravel()].
    """
    nx, ny = spec.nx, spec.ny
    nu = (nx - 1) * ny
    nv = nx * (ny - 1)
    rows, cols, vals = [], [], []

    def cell(i, j):
        return i * ny + j

    # u faces: face (i, j) with i = 1..nx-1 sits between cells (i-1, j), (i, j)
    for i in range(1, nx):
        for j in range(ny):
            k = (i - 1) * ny + j
            rows += [cell(i - 1, j), cell(i, j)]
            cols += [k, k]
            vals += [1.0 / spec.hx, -1.0 / spec.hx]
    # v faces: face (i, j) with j = 1..ny-1 sits between cells (i, j-1), (i, j)
    for i in range(nx):
        for j in range(1, ny):
            k = nu + i * (ny - 1) + (j - 1)
            rows += [cell(i, j - 1), cell(i, j)]
            cols += [k, k]
            vals += [1.0 / spec.hy, -1.0 / spec.hy]

    return sp.csr_matrix((vals, (rows, cols)), shape=(nx * ny, nu + nv))


def weighted_cell_flux_divergence(spec: GridSpec, w: np.ndarray) -> sp.csr_matrix:
    """Matrix of s -> div(w * grad s) with zero-flux walls.

    ``w`` is a nonnegative cell field; face weights are arithmetic means
    of the adjacent cells.  Symmetric negative semidefinite; equals
    -D diag(w_faces) D^T with D the divergence matrix, since the face
    gradient is the negative transpose of D.
    """
    wx = 0.5 * (w[1:, :] + w[:-1, :])   # interior vertical faces (nx-1, ny)
    wy = 0.5 * (w[:, 1:] + w[:, :-1])   # interior horizontal faces (nx, ny-1)
    weights = np.concatenate([wx.ravel(), wy.ravel()])
    D = divergence_matrix(spec)
    return (-(D @ sp.diags(weights) @ D.T)).tocsr()
