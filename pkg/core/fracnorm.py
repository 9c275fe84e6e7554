"""
Fractional Norms

Surface meshes of the unit cylinder boundary, the pair index sets of the
boundary functional, the functional itself and the mollifier extension.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
from scipy import ndimage

from core.errors import DomainError
from core.kernel_math import bound_integral
from models.reports import PsiReport

logger = logging.getLogger(__name__)

BOTTOM, TOP, LATERAL = 0, 1, 2
PAIR_BLOCK = 512

# normalising constants of K(x) = c_n (1 - |x|^2)^3 on the unit ball
MOLLIFIER_CONSTANTS = {1: 35.0 / 32.0, 2: 4.0 / np.pi}

BoundaryTrace = Callable[[np.ndarray], np.ndarray]


def _face_cells(fixed_axis: int, fixed_value: float, extents, m: int, label: int):
    """Uniform square cells of side 1/m on one axis-aligned face"""
    axes = []
    for lo, hi in extents:
        count = int(round((hi - lo) * m))
        axes.append(lo + (np.arange(count) + 0.5) / m)
    grids = np.meshgrid(*axes, indexing='ij')
    columns = [g.ravel() for g in grids]
    columns.insert(fixed_axis, np.full(columns[0].shape, fixed_value))
    centers = np.stack(columns, axis=-1)
    tangent = np.ones(centers.shape[1]) / m
    tangent[fixed_axis] = 0.0
    sizes = np.tile(tangent, (len(centers), 1))
    return centers, sizes, np.full(len(centers), label)


@dataclass(frozen=True, eq=False)
class CylinderBoundary:
    """
    Surface mesh of A = boundary of C_1 = (-1, 1)^n x (0, 1)

    Cells are axis-aligned squares (segments for n = 1) with ``sizes`` holding
    the cell extent per coordinate (zero in the face-normal direction).
    M is the bottom face, Gamma its relative boundary.
    """

    n: int
    cells_per_unit: int
    centers: np.ndarray
    sizes: np.ndarray
    labels: np.ndarray

    @classmethod
    def build(cls, n: int, cells_per_unit: int) -> "CylinderBoundary":
        if n not in (1, 2):
            raise DomainError(f"base dimension must be 1 or 2, got {n}")
        m = int(cells_per_unit)
        if m < 1:
            raise DomainError("cells_per_unit must be positive")
        base = [(-1.0, 1.0)] * n
        parts = [
            _face_cells(n, 0.0, base, m, BOTTOM),
            _face_cells(n, 1.0, base, m, TOP)
        ]
        for axis in range(n):
            extents = [(-1.0, 1.0)] * (n - 1) + [(0.0, 1.0)]
            for side in (-1.0, 1.0):
                parts.append(_face_cells(axis, side, extents, m, LATERAL))
        centers, sizes, labels = (np.concatenate(p) for p in zip(*parts))
        return cls(n=n, cells_per_unit=m, centers=centers, sizes=sizes, labels=labels)

    @property
    def areas(self) -> np.ndarray:
        return np.prod(np.where(self.sizes > 0, self.sizes, 1.0), axis=1)

    @property
    def total_area(self) -> float:
        return float(np.sum(self.areas))

    def in_M(self) -> np.ndarray:
        return self.labels == BOTTOM

    @staticmethod
    def d_M(points: np.ndarray) -> np.ndarray:
        """Distance to M = [-1, 1]^n x {0}"""
        points = np.asarray(points, dtype=float)
        outside = np.clip(np.abs(points[..., :-1]) - 1.0, 0.0, None)
        return np.sqrt(np.sum(outside ** 2, axis=-1) + points[..., -1] ** 2)

    @staticmethod
    def d_Gamma(points: np.ndarray) -> np.ndarray:
        """Distance to Gamma = boundary of [-1, 1]^n x {0}"""
        points = np.asarray(points, dtype=float)
        x = np.abs(points[..., :-1])
        outside = np.sqrt(np.sum(np.clip(x - 1.0, 0.0, None) ** 2, axis=-1))
        inside = np.min(1.0 - x, axis=-1)
        to_square = np.where(np.all(x <= 1.0, axis=-1), inside, outside)
        return np.sqrt(to_square ** 2 + points[..., -1] ** 2)

    def refine(self, index: int) -> Tuple[np.ndarray, np.ndarray]:
        """Centres and areas of the 2^n sub-cells of one cell"""
        center, size = self.centers[index], self.sizes[index]
        tangent = np.flatnonzero(size > 0)
        offsets = []
        for corner in np.ndindex(*(2,) * len(tangent)):
            shift = np.zeros_like(center)
            shift[tangent] = (np.array(corner) - 0.5) * 0.5 * size[tangent]
            offsets.append(center + shift)
        return np.array(offsets), np.full(len(offsets), self.areas[index] / len(offsets))


@dataclass(frozen=True)
class IndexSets:
    """
    Pair regions of the two double integrals

    Each region is (row set, column set) with sets named 'A' (all of the
    boundary), 'M' (bottom face) or 'A\\M' (the rest).
    """

    frac: Tuple[str, str]
    weig: Tuple[str, str]

    @classmethod
    def for_order(cls, s: float) -> "IndexSets":
        if s <= 0.5:
            return cls(frac=('A', 'A'), weig=('A\\M', 'A\\M'))
        return cls(frac=('M', 'M'), weig=('A\\M', 'A'))

    @staticmethod
    def mask(name: str, boundary: CylinderBoundary) -> np.ndarray:
        in_M = boundary.in_M()
        if name == 'A':
            return np.ones_like(in_M)
        if name == 'M':
            return in_M
        if name == 'A\\M':
            return ~in_M
        raise DomainError(f"unknown boundary set '{name}'")


def _pair_sum(z: np.ndarray, w: np.ndarray, area: np.ndarray, rows: np.ndarray, cols: np.ndarray,
              power: float, row_weight: np.ndarray) -> float:
    """
    sum over i in rows, j in cols, i != j of
    row_weight_i a_i a_j (w_i - w_j)^2 / |z_i - z_j|^power, in fixed row blocks
    """
    col_idx = np.flatnonzero(cols)
    zc, wc, ac = z[col_idx], w[col_idx], area[col_idx]
    total = 0.0
    for start in range(0, len(rows), PAIR_BLOCK):
        block = rows[start:start + PAIR_BLOCK]
        dist = np.linalg.norm(z[block, None, :] - zc[None, :, :], axis=-1)
        same = block[:, None] == col_idx[None, :]
        dist = np.where(same, 1.0, dist)
        terms = (w[block, None] - wc[None, :]) ** 2 * ac[None, :] / dist ** power
        terms = np.where(same, 0.0, terms)
        total += float(np.sum(row_weight[block] * area[block] * terms.sum(axis=1)))
    return total


def _self_sum(boundary: CylinderBoundary, w: BoundaryTrace, index: int, power: float,
              weighted: bool, s: float) -> float:
    """Contribution of a diagonal cell pair from one refinement level"""
    z, a = boundary.refine(index)
    values = np.asarray(w(z), dtype=float)
    weight = boundary.d_M(z) ** (1.0 - 2.0 * s) if weighted else np.ones(len(z))
    total = 0.0
    for i in range(len(z)):
        for j in range(len(z)):
            if i != j:
                total += weight[i] * a[i] * a[j] * (values[i] - values[j]) ** 2 \
                    / np.linalg.norm(z[i] - z[j]) ** power
    return total


def psi_terms(w: BoundaryTrace, boundary: CylinderBoundary, s: float) -> Tuple[float, float, float]:
    """(L2 term, fractional double integral, weighted double integral)"""
    n = boundary.n
    z = boundary.centers
    area = boundary.areas
    values = np.asarray(w(z), dtype=float)
    sets = IndexSets.for_order(s)

    l2 = float(np.sum(area * values ** 2))

    def region(pair, power, weighted):
        rows = IndexSets.mask(pair[0], boundary)
        cols = IndexSets.mask(pair[1], boundary)
        weight = np.ones(len(z))
        if weighted:
            # row cells lie off M, so d_M > 0 there
            weight[rows] = boundary.d_M(z[rows]) ** (1.0 - 2.0 * s)
        total = _pair_sum(z, values, area, np.flatnonzero(rows), cols, power, weight)
        for index in np.flatnonzero(rows & cols):
            total += _self_sum(boundary, w, int(index), power, weighted, s)
        return total

    frac = region(sets.frac, n + 2.0 * s, weighted=False)
    weig = region(sets.weig, n + 1.0, weighted=True)
    return l2, frac, weig


def psi_s(w: BoundaryTrace, boundary: CylinderBoundary, s: float, epsilon: float) -> PsiReport:
    """
    Boundary functional of a trace against int_epsilon^1 rho^(-2s)

    Args:
        w: trace, callable on points of shape (..., n+1)
        boundary: surface mesh of the unit cylinder
        s: fractional order
        epsilon: scale in (0, 1/2)

    Returns:
        PsiReport
    """
    if not 0.0 < epsilon < 0.5:
        raise DomainError(f"epsilon must lie in (0, 1/2), got {epsilon}")
    l2, frac, weig = psi_terms(w, boundary, s)
    logger.debug("psi terms at s=%.3f: l2=%.6g frac=%.6g weig=%.6g", s, l2, frac, weig)
    return PsiReport(
        l2_term=l2,
        frac_term=frac,
        weig_term=weig,
        epsilon=float(epsilon),
        bound_integral=bound_integral(s, epsilon),
        s=float(s)
    )


def _hypothesis_profile(d: np.ndarray, s: float, epsilon: float) -> np.ndarray:
    d = np.maximum(d, 1e-300)
    near = (1.0 / epsilon) * (d / epsilon) ** (2.0 * s - 1.0) if s <= 0.5 else np.full(d.shape, 1.0 / epsilon)
    return np.where(d <= epsilon, near, 1.0 / d)


def trace_hypothesis_constant(w: BoundaryTrace, boundary: CylinderBoundary, s: float,
                              epsilon: float) -> float:
    """
    Smallest c_s with |w| <= c_s and |Dw| below c_s times the distance profile
    to Gamma, measured at cell centres (tangential central differences)
    """
    z = boundary.centers
    values = np.asarray(w(z), dtype=float)
    tangential = np.zeros(len(z))
    step = 0.25 / boundary.cells_per_unit
    for axis in range(boundary.n + 1):
        moving = boundary.sizes[:, axis] > 0
        shift = np.zeros_like(z)
        shift[:, axis] = step
        derivative = (np.asarray(w(z + shift)) - np.asarray(w(z - shift))) / (2.0 * step)
        tangential += np.where(moving, derivative ** 2, 0.0)
    profile = _hypothesis_profile(boundary.d_Gamma(z), s, epsilon)
    return float(max(np.max(np.abs(values)), np.max(np.sqrt(tangential) / profile)))


def mollifier_kernel(n: int, spacing: float, lam: float) -> np.ndarray:
    """Discrete K(x/lam)/lam^n on the sample lattice, normalised to unit sum"""
    if lam < 2.0 * spacing:
        raise DomainError(
            f"lambda = {lam} is below two sample spacings ({2.0 * spacing}); kernel under-resolved"
        )
    radius = int(np.floor(lam / spacing))
    offsets = np.arange(-radius, radius + 1) * spacing / lam
    grids = np.meshgrid(*[offsets] * n, indexing='ij')
    r2 = sum(g ** 2 for g in grids)
    kernel = np.where(r2 < 1.0, (1.0 - r2) ** 3, 0.0)
    return kernel / kernel.sum()


def mollifier_extend(zeta: np.ndarray, spacing: float, lambdas) -> np.ndarray:
    """
    Extend samples zeta by convolution with the scaled kernel

    The convolution is periodic over the sample window. Returns an array of
    shape ``zeta.shape + (len(lambdas),)``, lambda last.
    """
    zeta = np.asarray(zeta, dtype=float)
    n = zeta.ndim
    if n not in (1, 2):
        raise DomainError(f"samples must be 1- or 2-dimensional, got {n}")
    layers = [ndimage.convolve(zeta, mollifier_kernel(n, spacing, lam), mode='wrap')
              for lam in lambdas]
    return np.stack(layers, axis=-1)


def mollifier_gradient_constant(zeta: np.ndarray, spacing: float, lambdas) -> np.ndarray:
    """lambda * max |grad zeta~(., lambda)| per lambda"""
    extended = mollifier_extend(zeta, spacing, lambdas)
    constants = []
    for k, lam in enumerate(lambdas):
        layer = extended[..., k]
        grads = np.gradient(layer, spacing)
        if layer.ndim == 1:
            grads = [grads]
        magnitude = np.sqrt(sum(g ** 2 for g in grads))
        constants.append(lam * float(np.max(magnitude)))
    return np.array(constants)
