"""
Assembly

Discrete weighted Dirichlet form, nodal potential measures and region masks.

Per cell the Dirichlet integral int lambda^a |grad v|^2 is approximated by
hx^n int_cell lambda^a times the mean over the cell's edges of squared
difference quotients in each direction. Summed over cells this is a graph
Laplacian with nonnegative edge conductances (an M-matrix), exact for
affine fields.
"""

import logging
import threading
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from core.weighted_grid import edge_mean, weight_integrals
from models.grid import TensorGrid
from models.kernel import FractionalOrder

logger = logging.getLogger(__name__)

DISK_SUBSAMPLES = 8
# forms hold their grid and stiffness alive; scans reuse only a handful
FORM_CACHE_SIZE = 8


def dual_lengths(nodes: np.ndarray) -> np.ndarray:
    """Length of each node's dual interval (half cells at the ends)"""
    steps = np.diff(nodes)
    lengths = np.zeros(len(nodes))
    lengths[:-1] += 0.5 * steps
    lengths[1:] += 0.5 * steps
    return lengths


def _outer(vectors: Sequence[np.ndarray]) -> np.ndarray:
    result = np.ones(())
    for v in vectors:
        result = np.multiply.outer(result, v)
    return result


class DirichletForm:
    """
    Quadratic form D(v) = v^T K v approximating int lambda^a |grad v|^2

    Holds the edge conductances of one (grid, order) pair; ``matrix`` is the
    sparse assembled K, ``cell_energy`` the per-cell contributions used for
    restricted regions.
    """

    def __init__(self, grid: TensorGrid, order: FractionalOrder):
        self.grid = grid
        self.order = order
        self.weights = weight_integrals(grid, order.a)
        self._matrix = None
        self._lock = threading.Lock()

    def _index(self) -> np.ndarray:
        return np.arange(self.grid.num_nodes).reshape(self.grid.shape)

    def edges(self):
        """Yield (first node, second node, conductance) arrays per axis"""
        grid = self.grid
        index = self._index()
        x_dual = dual_lengths(grid.x)
        W = self.weights.integrals
        h = grid.lambda_steps

        # lambda edges: W_j / h_j^2 times the dual x-measure of the vertical line
        base = _outer([x_dual] * grid.n)
        cond = np.multiply.outer(base, W / h ** 2)
        yield index[..., :-1].ravel(), index[..., 1:].ravel(), cond.ravel()

        # x edges: (1/hx) * other dual x-lengths * mean of adjacent lambda weights
        W_node = np.zeros(grid.nlambda + 1)
        W_node[:-1] += 0.5 * W
        W_node[1:] += 0.5 * W
        for axis in range(grid.n):
            factors = []
            for other in range(grid.n):
                if other == axis:
                    factors.append(np.full(grid.nx, 1.0 / grid.hx))
                else:
                    factors.append(x_dual)
            factors.append(W_node)
            cond = _outer(factors)
            lead = [slice(None)] * (grid.n + 1)
            tail = [slice(None)] * (grid.n + 1)
            lead[axis] = slice(None, -1)
            tail[axis] = slice(1, None)
            yield index[tuple(lead)].ravel(), index[tuple(tail)].ravel(), cond.ravel()

    def matrix(self) -> sparse.csr_matrix:
        with self._lock:
            if self._matrix is None:
                rows, cols, data = [], [], []
                for first, second, cond in self.edges():
                    rows.extend([first, second, first, second])
                    cols.extend([first, second, second, first])
                    data.extend([cond, cond, -cond, -cond])
                size = self.grid.num_nodes
                self._matrix = sparse.coo_matrix(
                    (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
                    shape=(size, size)
                ).tocsr()
                logger.debug("assembled stiffness with %d nonzeros", self._matrix.nnz)
        return self._matrix

    def energy(self, values: np.ndarray) -> float:
        """v^T K v"""
        v = np.asarray(values, dtype=float).reshape(-1)
        return float(v @ (self.matrix() @ v))

    def cell_energy(self, values: np.ndarray) -> np.ndarray:
        """Per-cell contributions to v^T K v, shape ``grid.cell_shape``"""
        grid = self.grid
        values = np.asarray(values, dtype=float).reshape(grid.shape)
        lam_shape = (1,) * grid.n + (grid.nlambda,)
        total = edge_mean((np.diff(values, axis=grid.n) / grid.lambda_steps.reshape(lam_shape)) ** 2, grid.n)
        for axis in range(grid.n):
            total = total + edge_mean((np.diff(values, axis=axis) / grid.hx) ** 2, axis)
        return total * grid.hx ** grid.n * self.weights.integrals.reshape(lam_shape)


@lru_cache(maxsize=FORM_CACHE_SIZE)
def dirichlet_form(grid: TensorGrid, order: FractionalOrder) -> DirichletForm:
    """Shared DirichletForm per (grid object, order)"""
    return DirichletForm(grid, order)


def base_measure(grid: TensorGrid, bounds: Optional[Tuple[float, float]] = None,
                 center: float = 0.0) -> np.ndarray:
    """
    Measure of each base node's dual cell, optionally intersected with the
    cube [lo, hi]^n (shifted by ``center`` along the last axis)
    """
    x = grid.x
    left = np.maximum(x - 0.5 * grid.hx, -grid.R)
    right = np.minimum(x + 0.5 * grid.hx, grid.R)
    lengths = []
    for axis in range(grid.n):
        lo, hi = left, right
        if bounds is not None:
            shift = center if axis == grid.n - 1 else 0.0
            lo = np.maximum(left, bounds[0] + shift)
            hi = np.minimum(right, bounds[1] + shift)
        lengths.append(np.clip(hi - lo, 0.0, None))
    return _outer(lengths)


def disk_measure(grid: TensorGrid, radius: float) -> np.ndarray:
    """Measure of each base node's dual cell inside {|x| < radius}"""
    if grid.n == 1:
        return base_measure(grid, (-radius, radius))
    full = base_measure(grid)
    offsets = ((np.arange(DISK_SUBSAMPLES) + 0.5) / DISK_SUBSAMPLES - 0.5) * grid.hx
    X, Y = grid.base_coordinates()
    inside = np.zeros(full.shape)
    for dx in offsets:
        for dy in offsets:
            px = np.clip(X + dx, -grid.R, grid.R)
            py = np.clip(Y + dy, -grid.R, grid.R)
            inside += (px ** 2 + py ** 2 < radius ** 2)
    return full * inside / DISK_SUBSAMPLES ** 2


def cylinder_cell_mask(grid: TensorGrid, lower: float, upper: float, height: float,
                       center: float = 0.0) -> np.ndarray:
    """Cells inside [lower, upper]^(n-1) x [center+lower, center+upper] x [0, height]"""
    tol = 1e-9 * grid.hx
    x = grid.x
    inside = []
    for axis in range(grid.n):
        shift = center if axis == grid.n - 1 else 0.0
        inside.append((x[:-1] >= shift + lower - tol) & (x[1:] <= shift + upper + tol))
    lam = grid.lambda_nodes
    inside.append(lam[1:] <= height * (1 + 1e-12) + tol)
    mask = np.ones(grid.cell_shape, dtype=bool)
    for axis, flags in enumerate(inside):
        shape = [1] * (grid.n + 1)
        shape[axis] = len(flags)
        mask = mask & flags.reshape(shape)
    return mask


def halfball_cell_fractions(grid: TensorGrid, radius: float) -> np.ndarray:
    """
    Fraction of each cell inside the half-ball |(x, lambda)| < radius

    Cells entirely inside count 1, entirely outside 0; cut cells are split
    once into 2^(n+1) sub-cells and counted by sub-cell centre.
    """
    axes = list(grid.x_nodes) + [grid.lambda_nodes]
    lo = np.meshgrid(*[a[:-1] for a in axes], indexing='ij')
    hi = np.meshgrid(*[a[1:] for a in axes], indexing='ij')

    near = np.zeros(grid.cell_shape)
    far = np.zeros(grid.cell_shape)
    for l, h in zip(lo, hi):
        nearest = np.where((l <= 0) & (h >= 0), 0.0, np.minimum(np.abs(l), np.abs(h)))
        near += nearest ** 2
        far += np.maximum(np.abs(l), np.abs(h)) ** 2

    r2 = radius ** 2
    fractions = np.where(far < r2, 1.0, 0.0)
    cut = (near < r2) & (far >= r2)
    if np.any(cut):
        sub_inside = np.zeros(int(np.count_nonzero(cut)))
        lo_cut = [l[cut] for l in lo]
        hi_cut = [h[cut] for h in hi]
        for corner in np.ndindex(*(2,) * (grid.n + 1)):
            dist2 = np.zeros_like(sub_inside)
            for k, c in enumerate(corner):
                centre = lo_cut[k] + (0.25 + 0.5 * c) * (hi_cut[k] - lo_cut[k])
                dist2 += centre ** 2
            sub_inside += dist2 < r2
        fractions[cut] = sub_inside / 2 ** (grid.n + 1)
    return fractions


def snap_radius(grid: TensorGrid, radius: float) -> float:
    """Nearest positive x node to radius"""
    x = grid.x
    positive = x[x > 1e-12 * grid.R]
    return float(positive[np.argmin(np.abs(positive - radius))])


def snap_height(grid: TensorGrid, height: float) -> float:
    """Smallest lambda node >= height (the top node when none is)"""
    lam = grid.lambda_nodes
    above = lam[lam >= height * (1 - 1e-12)]
    return float(above[0]) if len(above) else float(lam[-1])
