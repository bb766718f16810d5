"""Exact k-nearest-neighbour kernels over a uniform bucket grid.

Two implementations share one contract: for every user return the k BS
indices closest under the region metric (ties broken by lower index) and
the squared distances.  ``knn_grid`` dispatches to the numba kernel when
numba is enabled and to the vectorised numpy path otherwise.
"""
from __future__ import annotations

import math

import numpy as np

from . import _accel
from ._accel import njit

NO_INDEX = 2 ** 62


class BucketGrid:
    """BS points bucketed into an nx-by-ny grid (counting sort by cell)."""

    def __init__(self, bx, by, width, height, cell_size):
        self.width = float(width)
        self.height = float(height)
        self.nx = max(1, int(width // cell_size))
        self.ny = max(1, int(height // cell_size))
        self.hx = self.width / self.nx
        self.hy = self.height / self.ny
        cx = np.minimum((bx / self.hx).astype(np.int64), self.nx - 1)
        cy = np.minimum((by / self.hy).astype(np.int64), self.ny - 1)
        cell = cy * self.nx + cx
        self.order = np.argsort(cell, kind="stable").astype(np.int64)
        counts = np.bincount(cell, minlength=self.nx * self.ny)
        self.start = np.zeros(self.nx * self.ny + 1, dtype=np.int64)
        np.cumsum(counts, out=self.start[1:])

    def cell_of(self, x, y):
        cx = np.minimum((x / self.hx).astype(np.int64), self.nx - 1)
        cy = np.minimum((y / self.hy).astype(np.int64), self.ny - 1)
        return cx, cy


def default_cell_size(n_bs, width, height, k):
    density = max(n_bs, 1) / (width * height)
    return math.sqrt(max(k, 2) / density)


def squared_distances(ux, uy, bx, by, width, height, torus):
    """Pairwise squared distances, users on rows; same arithmetic as the kernels."""
    dx = np.abs(ux[:, None] - bx[None, :])
    dy = np.abs(uy[:, None] - by[None, :])
    if torus:
        dx = np.minimum(dx, width - dx)
        dy = np.minimum(dy, height - dy)
    return dx * dx + dy * dy


def knn_brute(ux, uy, bx, by, k, width, height, torus, chunk=512):
    """O(U*B) reference scan."""
    n_u = len(ux)
    idx = np.empty((n_u, k), dtype=np.int64)
    d2 = np.empty((n_u, k), dtype=np.float64)
    for lo in range(0, n_u, chunk):
        hi = min(lo + chunk, n_u)
        block = squared_distances(ux[lo:hi], uy[lo:hi], bx, by, width, height, torus)
        order = np.argsort(block, axis=1, kind="stable")[:, :k]
        idx[lo:hi] = order
        d2[lo:hi] = np.take_along_axis(block, order, axis=1)
    return idx, d2


def knn_grid(ux, uy, bx, by, k, width, height, torus, cell_size=None, use_numba=None):
    if cell_size is None:
        cell_size = default_cell_size(len(bx), width, height, k)
    grid = BucketGrid(bx, by, width, height, cell_size)
    if use_numba is None:
        use_numba = _accel.USE_NUMBA
    if use_numba and _accel.HAS_NUMBA:
        return _knn_grid_jit(ux, uy, bx, by, k, grid.width, grid.height, torus,
                             grid.nx, grid.ny, grid.hx, grid.hy, grid.order, grid.start)
    return _knn_grid_numpy(ux, uy, bx, by, k, grid, torus)


# -- numba kernel -----------------------------------------------------------

@njit(cache=True)
def _block_bound(ux, uy, cx, cy, r, nx, ny, hx, hy, torus):
    """Distance from (ux, uy) to the outside of the searched block of cells."""
    bound = np.inf
    if torus:
        if 2 * r + 1 < nx:
            bound = min(bound, ux - (cx - r) * hx, (cx + r + 1) * hx - ux)
        if 2 * r + 1 < ny:
            bound = min(bound, uy - (cy - r) * hy, (cy + r + 1) * hy - uy)
    else:
        if cx - r > 0:
            bound = min(bound, ux - (cx - r) * hx)
        if cx + r + 1 < nx:
            bound = min(bound, (cx + r + 1) * hx - ux)
        if cy - r > 0:
            bound = min(bound, uy - (cy - r) * hy)
        if cy + r + 1 < ny:
            bound = min(bound, (cy + r + 1) * hy - uy)
    return bound


@njit(cache=True)
def _scan_cell(cell, ux, uy, bx, by, width, height, torus, order, start, best_i, best_d):
    for p in range(start[cell], start[cell + 1]):
        b = order[p]
        dx = abs(ux - bx[b])
        dy = abs(uy - by[b])
        if torus:
            dx = min(dx, width - dx)
            dy = min(dy, height - dy)
        d = dx * dx + dy * dy
        k = best_d.shape[0]
        last = k - 1
        if d > best_d[last] or (d == best_d[last] and b > best_i[last]):
            continue
        pos = last
        while pos > 0 and (best_d[pos - 1] > d or (best_d[pos - 1] == d and best_i[pos - 1] > b)):
            best_d[pos] = best_d[pos - 1]
            best_i[pos] = best_i[pos - 1]
            pos -= 1
        best_d[pos] = d
        best_i[pos] = b


@njit(cache=True)
def _knn_grid_jit(ux, uy, bx, by, k, width, height, torus, nx, ny, hx, hy, order, start):
    n_u = ux.shape[0]
    out_i = np.empty((n_u, k), dtype=np.int64)
    out_d = np.empty((n_u, k), dtype=np.float64)
    best_i = np.empty(k, dtype=np.int64)
    best_d = np.empty(k, dtype=np.float64)
    max_r = max(nx, ny)
    for u in range(n_u):
        x = ux[u]
        y = uy[u]
        cx = min(int(x / hx), nx - 1)
        cy = min(int(y / hy), ny - 1)
        best_i[:] = NO_INDEX
        best_d[:] = np.inf
        r = 0
        while True:
            full = torus and 2 * r + 1 >= nx and 2 * r + 1 >= ny
            if torus and (2 * r + 1 > nx or 2 * r + 1 > ny):
                # ring wraps onto itself: visit each residue cell once
                for my in range(ny):
                    ty = abs(my - cy)
                    ty = min(ty, ny - ty)
                    for mx in range(nx):
                        tx = abs(mx - cx)
                        tx = min(tx, nx - tx)
                        if max(tx, ty) == r:
                            _scan_cell(my * nx + mx, x, y, bx, by, width, height, torus,
                                       order, start, best_i, best_d)
            else:
                for dy in range(-r, r + 1):
                    iy = cy + dy
                    if torus:
                        iy %= ny
                    elif iy < 0 or iy >= ny:
                        continue
                    step = 1 if (dy == -r or dy == r) else 2 * r
                    if step == 0:
                        step = 1
                    for dx in range(-r, r + 1, step):
                        ix = cx + dx
                        if torus:
                            ix %= nx
                        elif ix < 0 or ix >= nx:
                            continue
                        _scan_cell(iy * nx + ix, x, y, bx, by, width, height, torus,
                                   order, start, best_i, best_d)
            bound = _block_bound(x, y, cx, cy, r, nx, ny, hx, hy, torus)
            if best_d[k - 1] < bound * bound or full or r > max_r:
                break
            r += 1
        out_i[u, :] = best_i
        out_d[u, :] = best_d
    return out_i, out_d


# -- numpy path -------------------------------------------------------------

def _ring_cells(cx, cy, r, nx, ny, torus):
    """Cell ids at Chebyshev ring exactly r around (cx, cy), each once."""
    if torus:
        tx = np.abs(np.arange(nx) - cx)
        tx = np.minimum(tx, nx - tx)
        ty = np.abs(np.arange(ny) - cy)
        ty = np.minimum(ty, ny - ty)
        cheb = np.maximum(tx[None, :], ty[:, None])
        my, mx = np.nonzero(cheb == r)
        return my * nx + mx
    xs = np.arange(max(cx - r, 0), min(cx + r, nx - 1) + 1)
    ys = np.arange(max(cy - r, 0), min(cy + r, ny - 1) + 1)
    gx, gy = np.meshgrid(xs, ys)
    ring = np.maximum(np.abs(gx - cx), np.abs(gy - cy)) == r
    return (gy[ring] * nx + gx[ring]).ravel()


def _block_bound_np(ux, uy, cx, cy, r, grid, torus):
    nx, ny, hx, hy = grid.nx, grid.ny, grid.hx, grid.hy
    bound = np.full(ux.shape, np.inf)
    if torus:
        if 2 * r + 1 < nx:
            bound = np.minimum(bound, np.minimum(ux - (cx - r) * hx, (cx + r + 1) * hx - ux))
        if 2 * r + 1 < ny:
            bound = np.minimum(bound, np.minimum(uy - (cy - r) * hy, (cy + r + 1) * hy - uy))
        return bound
    if cx - r > 0:
        bound = np.minimum(bound, ux - (cx - r) * hx)
    if cx + r + 1 < nx:
        bound = np.minimum(bound, (cx + r + 1) * hx - ux)
    if cy - r > 0:
        bound = np.minimum(bound, uy - (cy - r) * hy)
    if cy + r + 1 < ny:
        bound = np.minimum(bound, (cy + r + 1) * hy - uy)
    return bound


def _knn_grid_numpy(ux, uy, bx, by, k, grid, torus):
    """Vectorised per user-cell: all users sharing a cell share a candidate block."""
    n_u = len(ux)
    out_i = np.empty((n_u, k), dtype=np.int64)
    out_d = np.empty((n_u, k), dtype=np.float64)
    ucx, ucy = grid.cell_of(ux, uy)
    ucell = ucy * grid.nx + ucx
    by_cell = np.argsort(ucell, kind="stable")
    bounds = np.searchsorted(ucell[by_cell], np.arange(grid.nx * grid.ny + 1))
    for cell in np.nonzero(np.diff(bounds))[0]:
        users = by_cell[bounds[cell]:bounds[cell + 1]]
        cx, cy = int(cell % grid.nx), int(cell // grid.nx)
        cand_cells = []
        r = 0
        while len(users):
            cand_cells.append(_ring_cells(cx, cy, r, grid.nx, grid.ny, torus))
            cells = np.concatenate(cand_cells)
            full = (torus and 2 * r + 1 >= grid.nx and 2 * r + 1 >= grid.ny) or r > max(grid.nx, grid.ny)
            cand = np.sort(np.concatenate([grid.order[grid.start[c]:grid.start[c + 1]] for c in cells]))
            if len(cand) >= k or full:
                d2 = squared_distances(ux[users], uy[users], bx[cand], by[cand],
                                       grid.width, grid.height, torus)
                take = min(k, len(cand))
                order = np.argsort(d2, axis=1, kind="stable")[:, :take]
                best_d = np.full((len(users), k), np.inf)
                best_i = np.full((len(users), k), NO_INDEX, dtype=np.int64)
                best_d[:, :take] = np.take_along_axis(d2, order, axis=1)
                best_i[:, :take] = cand[order]
                bound = _block_bound_np(ux[users], uy[users], cx, cy, r, grid, torus)
                done = (best_d[:, k - 1] < bound * bound) | full
                out_i[users[done]] = best_i[done]
                out_d[users[done]] = best_d[done]
                users = users[~done]
            r += 1
    return out_i, out_d
