"""
Weighted Grid

Graded tensor-product meshes on the truncated cylinder, exact cell integrals
of the weight lambda^a, cell gradients, multilinear interpolation and the
field dump format.
"""

import logging
import os
from typing import Tuple

import numpy as np
from scipy import interpolate

from core.errors import DomainError
from core.kernel_math import fractional_order
from models.grid import CellWeights, Field, TensorGrid

logger = logging.getLogger(__name__)

BINARY_MAGIC = b"CSX1"
TEXT_MAGIC = "CSX"


def default_grading(s: float) -> float:
    """Grading exponent clamp(1/(2s), 1, 4)"""
    return float(min(max(1.0 / (2.0 * s), 1.0), 4.0))


def build_grid(n: int, R: float, Lambda: float, Nx: int, Nlambda: int, q: float = 1.0) -> TensorGrid:
    """
    Build a grid on (-R, R)^n x (0, Lambda)

    Args:
        n: base dimension (1 or 2)
        R: half-width of the base cube
        Lambda: cylinder height
        Nx: cells per x axis
        Nlambda: cells in lambda
        q: grading exponent, lambda_j = Lambda (j/Nlambda)^q

    Returns:
        TensorGrid
    """
    if n not in (1, 2):
        raise DomainError(f"base dimension must be 1 or 2, got {n}")
    if not (R > 0 and Lambda > 0):
        raise DomainError(f"R and Lambda must be positive, got R={R}, Lambda={Lambda}")
    if int(Nx) < 4 or int(Nlambda) < 4:
        raise DomainError(f"Nx and Nlambda must be at least 4, got {Nx}, {Nlambda}")
    if not q >= 1.0:
        raise DomainError(f"grading exponent must be >= 1, got {q}")

    Nx, Nlambda = int(Nx), int(Nlambda)
    x = np.linspace(-R, R, Nx + 1)
    lam = Lambda * (np.arange(Nlambda + 1) / Nlambda) ** q
    lam[0], lam[-1] = 0.0, Lambda
    return TensorGrid(
        n=n,
        R=float(R),
        Lambda=float(Lambda),
        x_nodes=tuple(x.copy() for _ in range(n)),
        lambda_nodes=lam,
        q=float(q)
    )


def _check_exponent(a: float) -> float:
    a = float(a)
    if not -1.0 < a < 1.0:
        raise DomainError(f"weight exponent must lie in (-1, 1), got {a}")
    return a


def weight_integral(lo, hi, a: float):
    """int_lo^hi lambda^a d lambda"""
    a = _check_exponent(a)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    return (hi ** (a + 1.0) - lo ** (a + 1.0)) / (a + 1.0)


def weight_integrals(grid: TensorGrid, a: float) -> CellWeights:
    """Exact per-cell integrals of lambda^a and lambda^(-a), plus weighted centroids"""
    a = _check_exponent(a)
    lo, hi = grid.lambda_nodes[:-1], grid.lambda_nodes[1:]
    integrals = weight_integral(lo, hi, a)
    inverse = weight_integral(lo, hi, -a)
    moments = (hi ** (a + 2.0) - lo ** (a + 2.0)) / (a + 2.0)
    return CellWeights(
        a=a,
        integrals=integrals,
        inverse_integrals=inverse,
        centroids=moments / integrals
    )


def edge_mean(values: np.ndarray, axis: int) -> np.ndarray:
    """Average an edge array over every axis except ``axis`` so it lives on cells"""
    for other in range(values.ndim):
        if other == axis:
            continue
        lead = [slice(None)] * values.ndim
        tail = [slice(None)] * values.ndim
        lead[other] = slice(None, -1)
        tail[other] = slice(1, None)
        values = 0.5 * (values[tuple(lead)] + values[tuple(tail)])
    return values


def _lambda_shape(grid: TensorGrid) -> Tuple[int, ...]:
    return (1,) * grid.n + (grid.nlambda,)


def field_gradient(field: Field) -> np.ndarray:
    """
    Midpoint gradient of the multilinear interpolant on every cell

    Returns an array of shape ``cell_shape + (n+1,)`` ordered (x_1, ..., x_n, lambda).
    """
    grid = field.grid
    values = field.values
    components = []
    for axis in range(grid.n):
        diff = np.diff(values, axis=axis) / grid.hx
        components.append(edge_mean(diff, axis))
    lam_diff = np.diff(values, axis=grid.n) / grid.lambda_steps.reshape(_lambda_shape(grid))
    components.append(edge_mean(lam_diff, grid.n))
    return np.stack(components, axis=-1)


def cell_midpoints(grid: TensorGrid) -> Tuple[np.ndarray, ...]:
    """Broadcast cell-midpoint coordinates (x_1, ..., x_n, lambda)"""
    mids = [0.5 * (x[:-1] + x[1:]) for x in grid.x_nodes]
    lam = grid.lambda_nodes
    mids.append(0.5 * (lam[:-1] + lam[1:]))
    return tuple(np.meshgrid(*mids, indexing='ij'))


def _axes(grid: TensorGrid) -> Tuple[np.ndarray, ...]:
    return tuple(grid.x_nodes) + (grid.lambda_nodes,)


def interpolate_field(field: Field, points: np.ndarray) -> np.ndarray:
    """Multilinear interpolation at points of shape (..., n+1)"""
    interpolator = interpolate.RegularGridInterpolator(
        _axes(field.grid), field.values, method='linear', bounds_error=False, fill_value=None
    )
    points = np.asarray(points, dtype=float)
    return interpolator(points.reshape(-1, points.shape[-1])).reshape(points.shape[:-1])


def interpolate_gradient(field: Field, points: np.ndarray) -> np.ndarray:
    """Gradient of the multilinear interpolant at points of shape (..., n+1)"""
    axes = _axes(field.grid)
    dim = len(axes)
    points = np.asarray(points, dtype=float)
    flat = points.reshape(-1, dim)

    lower, local, steps = [], [], []
    for k, nodes in enumerate(axes):
        idx = np.clip(np.searchsorted(nodes, flat[:, k], side='right') - 1, 0, len(nodes) - 2)
        h = nodes[idx + 1] - nodes[idx]
        lower.append(idx)
        local.append(np.clip((flat[:, k] - nodes[idx]) / h, 0.0, 1.0))
        steps.append(h)

    gradient = np.zeros_like(flat)
    for corner in np.ndindex(*(2,) * dim):
        corner_values = field.values[tuple(lower[k] + corner[k] for k in range(dim))]
        for k in range(dim):
            term = np.where(corner[k], 1.0, -1.0) / steps[k]
            for m in range(dim):
                if m != k:
                    term = term * (local[m] if corner[m] else 1.0 - local[m])
            gradient[:, k] += corner_values * term
    return gradient.reshape(points.shape)


def rescale_field(field: Field, R: float) -> Field:
    """w_1(x, lambda) = w(R x, R lambda) by exact node scaling"""
    if not R > 0:
        raise DomainError(f"scaling radius must be positive, got {R}")
    grid = field.grid
    scaled = TensorGrid(
        n=grid.n,
        R=grid.R / R,
        Lambda=grid.Lambda / R,
        x_nodes=tuple(x / R for x in grid.x_nodes),
        lambda_nodes=grid.lambda_nodes / R,
        q=grid.q
    )
    return Field(scaled, field.values.copy(), field.order)


def dump_field(field: Field, filename: str, binary: bool = False) -> str:
    """
    Write a field dump

    Text: header ``CSX n R Lambda s q Nx Nlambda`` then one value per line.
    Binary: b"CSX1", int32 n Nx Nlambda, float64 R Lambda s q, float64 values,
    all little-endian.
    """
    grid = field.grid
    directory = os.path.dirname(filename)
    if directory:
        os.makedirs(directory, exist_ok=True)
    values = field.values.reshape(-1)
    if binary:
        with open(filename, 'wb') as f:
            f.write(BINARY_MAGIC)
            f.write(np.array([grid.n, grid.nx, grid.nlambda], dtype='<i4').tobytes())
            f.write(np.array([grid.R, grid.Lambda, field.s, grid.q], dtype='<f8').tobytes())
            f.write(values.astype('<f8').tobytes())
    else:
        header = (f"{TEXT_MAGIC} {grid.n} {grid.R!r} {grid.Lambda!r} {field.s!r} "
                  f"{grid.q!r} {grid.nx} {grid.nlambda}")
        np.savetxt(filename, values, fmt='%.17g', header=header, comments='')
    logger.debug("wrote field dump %s", filename)
    return filename


def load_field(filename: str) -> Field:
    """Read a text or binary field dump"""
    with open(filename, 'rb') as f:
        head = f.read(4)
    if head == BINARY_MAGIC:
        raw = np.fromfile(filename, dtype=np.uint8)
        n, nx, nlambda = np.frombuffer(raw[4:16].tobytes(), dtype='<i4')
        R, Lambda, s, q = np.frombuffer(raw[16:48].tobytes(), dtype='<f8')
        values = np.frombuffer(raw[48:].tobytes(), dtype='<f8')
    else:
        with open(filename, 'r', encoding='utf-8') as f:
            fields = f.readline().split()
        if len(fields) != 8 or fields[0] != TEXT_MAGIC:
            raise DomainError(f"{filename} is not a field dump")
        n, nx, nlambda = int(fields[1]), int(fields[6]), int(fields[7])
        R, Lambda, s, q = (float(v) for v in fields[2:6])
        values = np.loadtxt(filename, skiprows=1, ndmin=1)

    grid = build_grid(int(n), float(R), float(Lambda), int(nx), int(nlambda), float(q))
    return Field(grid, np.asarray(values, dtype=float).reshape(grid.shape), fractional_order(float(s)))
