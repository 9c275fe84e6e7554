"""
Base Solver

Common functionality for the extension solvers: Dirichlet/free node
bookkeeping, reduced systems and failure handling.
"""

import logging
from abc import ABC, abstractmethod
from typing import Tuple

import numpy as np
from scipy import sparse

from core.assembly import DirichletForm, dirichlet_form
from core.errors import DomainError, SolverError
from models.grid import BoundarySpec, TensorGrid
from models.kernel import FractionalOrder
from models.reports import SolveReport

logger = logging.getLogger(__name__)


class BaseSolver(ABC):
    """Base class for solvers acting on the discrete Dirichlet form"""

    def __init__(self, tol: float, max_iter: int):
        """
        Initialize base solver

        Args:
            tol: relative convergence tolerance
            max_iter: iteration cap (a non-positive value means "derive from size")
        """
        self.tol = float(tol)
        self.max_iter = int(max_iter)

    def form(self, grid: TensorGrid, order: FractionalOrder) -> DirichletForm:
        return dirichlet_form(grid, order)

    def split_nodes(self, grid: TensorGrid, bc: BoundarySpec) -> Tuple[np.ndarray, np.ndarray]:
        """Return (Dirichlet node indices, free node indices)"""
        bc.validate(grid)
        fixed = bc.dirichlet_indices(grid)
        free_mask = np.ones(grid.num_nodes, dtype=bool)
        free_mask[fixed] = False
        return fixed, np.flatnonzero(free_mask)

    def apply_dirichlet(self, grid: TensorGrid, bc: BoundarySpec, values: np.ndarray) -> np.ndarray:
        flat = np.array(values, dtype=float).reshape(-1)
        flat[bc.dirichlet_indices(grid)] = bc.dirichlet_values()
        return flat

    def check_dirichlet(self, grid: TensorGrid, bc: BoundarySpec, values: np.ndarray,
                        tol: float = 1e-12) -> None:
        flat = np.asarray(values, dtype=float).reshape(-1)
        gap = np.abs(flat[bc.dirichlet_indices(grid)] - bc.dirichlet_values())
        if gap.size and gap.max() > tol * (1.0 + np.abs(bc.dirichlet_values()).max()):
            raise DomainError(f"initial field violates the Dirichlet data (max gap {gap.max():.3e})")

    @staticmethod
    def reduce(matrix: sparse.csr_matrix, free: np.ndarray, fixed: np.ndarray):
        """Free-free and free-fixed blocks of a sparse matrix"""
        rows = matrix[free]
        return rows[:, free].tocsc(), rows[:, fixed]

    def _handle_failure(self, message: str, report: SolveReport):
        """Log and raise a solver failure carrying its report"""
        report.converged = False
        report.message = message
        logger.error("%s: %s", type(self).__name__, message)
        raise SolverError(message, report)

    @abstractmethod
    def solve(self, *args, **kwargs):
        """Run the solver - must be implemented by subclasses"""
        pass
