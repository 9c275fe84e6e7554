"""
Grid Models

Tensor-product meshes on the truncated cylinder (-R, R)^n x (0, Lambda),
nodal fields on them, exact lambda-weight tables and boundary data.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from models.kernel import FractionalOrder, Nonlinearity


@dataclass(frozen=True, eq=False)
class TensorGrid:
    """
    Uniform in x, power-graded in lambda

    Nodes are stored with the x axes first and lambda last, so a nodal array
    has shape ``(Nx+1,)*n + (Nlambda+1,)`` and ``values[..., 0]`` is the trace.
    """

    n: int
    R: float
    Lambda: float
    x_nodes: Tuple[np.ndarray, ...]
    lambda_nodes: np.ndarray
    q: float

    @property
    def nx(self) -> int:
        return len(self.x_nodes[0]) - 1

    @property
    def nlambda(self) -> int:
        return len(self.lambda_nodes) - 1

    @property
    def hx(self) -> float:
        return 2.0 * self.R / self.nx

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.nx + 1,) * self.n + (self.nlambda + 1,)

    @property
    def cell_shape(self) -> Tuple[int, ...]:
        return (self.nx,) * self.n + (self.nlambda,)

    @property
    def num_nodes(self) -> int:
        return int(np.prod(self.shape))

    @property
    def lambda_steps(self) -> np.ndarray:
        return np.diff(self.lambda_nodes)

    @property
    def x(self) -> np.ndarray:
        return self.x_nodes[0]

    def coordinates(self) -> Tuple[np.ndarray, ...]:
        """Broadcast node coordinates (x_1, ..., x_n, lambda)"""
        return tuple(np.meshgrid(*self.x_nodes, self.lambda_nodes, indexing='ij'))

    def base_coordinates(self) -> Tuple[np.ndarray, ...]:
        """Broadcast coordinates of the lambda = 0 node layer"""
        return tuple(np.meshgrid(*self.x_nodes, indexing='ij'))

    def lateral_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        for axis in range(self.n):
            index = [slice(None)] * (self.n + 1)
            index[axis] = 0
            mask[tuple(index)] = True
            index[axis] = -1
            mask[tuple(index)] = True
        return mask

    def top_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        mask[..., -1] = True
        return mask & ~self.lateral_mask()

    def bottom_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        mask[..., 0] = True
        return mask & ~self.lateral_mask()

    def lateral_indices(self) -> np.ndarray:
        return np.flatnonzero(self.lateral_mask())

    def top_indices(self) -> np.ndarray:
        return np.flatnonzero(self.top_mask())

    def bottom_indices(self) -> np.ndarray:
        return np.flatnonzero(self.bottom_mask())


@dataclass(frozen=True, eq=False)
class CellWeights:
    """
    Exact per-interval integrals of the weight

    ``integrals[j]`` is the integral of lambda^a over the j-th lambda cell,
    ``inverse_integrals[j]`` the integral of lambda^(-a) (the cell resistance
    used for the weighted flux) and ``centroids[j]`` the lambda^a-weighted
    centroid of the cell.
    """

    a: float
    integrals: np.ndarray
    inverse_integrals: np.ndarray
    centroids: np.ndarray


@dataclass(eq=False)
class Field:
    """Nodal values of an extension v on a grid; the trace is values[..., 0]"""

    grid: TensorGrid
    values: np.ndarray
    order: FractionalOrder

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"field shape {self.values.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")

    @property
    def s(self) -> float:
        return self.order.s

    @property
    def trace(self) -> np.ndarray:
        return self.values[..., 0]

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy(), self.order)


@dataclass(frozen=True, eq=False)
class BottomCondition:
    """Condition on lambda = 0: nonlinear Neumann coupling or Dirichlet data g"""

    kind: str
    nl: Optional[Nonlinearity] = None
    values: Optional[np.ndarray] = None

    @classmethod
    def nonlinear_neumann(cls, nl: Nonlinearity) -> "BottomCondition":
        return cls(kind='nonlinear_neumann', nl=nl)

    @classmethod
    def dirichlet(cls, values: np.ndarray) -> "BottomCondition":
        return cls(kind='dirichlet', values=np.asarray(values, dtype=float))

    @property
    def is_dirichlet(self) -> bool:
        return self.kind == 'dirichlet'


@dataclass(frozen=True, eq=False)
class BoundarySpec:
    """
    Boundary data on the truncated cylinder

    ``lateral`` and ``top`` are ordered like ``grid.lateral_indices()`` and
    ``grid.top_indices()``; a Dirichlet bottom is ordered like
    ``grid.bottom_indices()``.
    """

    lateral: np.ndarray
    top: np.ndarray
    bottom: BottomCondition

    def validate(self, grid: TensorGrid) -> None:
        if len(self.lateral) != len(grid.lateral_indices()):
            raise ValueError("lateral data does not match the lateral face node count")
        if len(self.top) != len(grid.top_indices()):
            raise ValueError("top data does not match the top face node count")
        if self.bottom.is_dirichlet and len(self.bottom.values) != len(grid.bottom_indices()):
            raise ValueError("bottom data does not match the bottom face node count")

    def dirichlet_indices(self, grid: TensorGrid) -> np.ndarray:
        parts = [grid.lateral_indices(), grid.top_indices()]
        if self.bottom.is_dirichlet:
            parts.append(grid.bottom_indices())
        return np.concatenate(parts)

    def dirichlet_values(self) -> np.ndarray:
        parts = [self.lateral, self.top]
        if self.bottom.is_dirichlet:
            parts.append(self.bottom.values)
        return np.concatenate(parts)

    @classmethod
    def from_values(cls, grid: TensorGrid, values: np.ndarray,
                    bottom: Optional[BottomCondition] = None) -> "BoundarySpec":
        """Take lateral/top (and, without ``bottom``, Dirichlet bottom) data from a nodal array"""
        flat = np.asarray(values, dtype=float).reshape(-1)
        if bottom is None:
            bottom = BottomCondition.dirichlet(flat[grid.bottom_indices()])
        return cls(
            lateral=flat[grid.lateral_indices()],
            top=flat[grid.top_indices()],
            bottom=bottom
        )

    @classmethod
    def from_function(cls, grid: TensorGrid, fn: Callable[..., np.ndarray],
                      bottom: Optional[BottomCondition] = None) -> "BoundarySpec":
        """Sample fn(x_1, ..., x_n, lambda) on the boundary nodes"""
        values = np.broadcast_to(fn(*grid.coordinates()), grid.shape)
        return cls.from_values(grid, values, bottom=bottom)
