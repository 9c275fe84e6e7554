"""
Linear Dirichlet Solver

Weighted-harmonic extension with Dirichlet data on the whole cylinder
boundary, by Jacobi-preconditioned conjugate gradients.
"""

import logging
from typing import Tuple

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as splinalg

from core.base_solver import BaseSolver
from core.errors import DomainError
from models.grid import BoundarySpec, Field, TensorGrid
from models.kernel import FractionalOrder
from models.reports import SolveReport

logger = logging.getLogger(__name__)


class LinearDirichletSolver(BaseSolver):
    """Minimizer of the discrete Dirichlet form for given boundary values"""

    def __init__(self, tol: float = 1e-10, max_iter: int = 0):
        super().__init__(tol, max_iter)

    def solve(self, grid: TensorGrid, order: FractionalOrder, bc: BoundarySpec,
              tol: float = None) -> Tuple[Field, SolveReport]:
        """
        Solve K_ff v_f = -K_fd v_d

        Args:
            grid: grid of the cylinder
            order: fractional order
            bc: boundary data with a Dirichlet bottom
            tol: relative residual target (solver default when omitted)

        Returns:
            (Field, SolveReport)
        """
        if not bc.bottom.is_dirichlet:
            raise DomainError("linear Dirichlet solve needs Dirichlet data on the bottom face")
        rtol = self.tol if tol is None else float(tol)
        form = self.form(grid, order)
        fixed, free = self.split_nodes(grid, bc)
        values = self.apply_dirichlet(grid, bc, np.zeros(grid.num_nodes))

        report = SolveReport(
            iterations=0,
            final_energy=0.0,
            energy_history=[],
            residual_norm=0.0,
            converged=True,
            method='cg'
        )

        if free.size:
            K_ff, K_fd = self.reduce(form.matrix(), free, fixed)
            rhs = -(K_fd @ values[fixed])
            diagonal = K_ff.diagonal()
            preconditioner = sparse.diags(1.0 / diagonal)
            max_iter = self.max_iter if self.max_iter > 0 else 10 * grid.num_nodes
            counter = {'iterations': 0}

            def count(_):
                counter['iterations'] += 1

            # warm start from the mean of the boundary data
            x0 = np.full(free.size, float(np.mean(values[fixed])))
            solution, info = splinalg.cg(
                K_ff, rhs, x0=x0, rtol=rtol, atol=0.0, maxiter=max_iter,
                M=preconditioner, callback=count
            )
            values[free] = solution
            rhs_norm = np.linalg.norm(rhs)
            residual = np.linalg.norm(K_ff @ solution - rhs)
            report.iterations = counter['iterations']
            report.residual_norm = float(residual / rhs_norm) if rhs_norm > 0 else float(residual)
            if info != 0:
                report.final_energy = 0.5 * order.ds * form.energy(values)
                report.energy_history = [report.final_energy]
                self._handle_failure(
                    f"conjugate gradients stopped after {report.iterations} iterations "
                    f"(relative residual {report.residual_norm:.3e})", report
                )

        report.final_energy = 0.5 * order.ds * form.energy(values)
        report.energy_history = [report.final_energy]
        logger.debug("cg converged in %d iterations, residual %.3e",
                     report.iterations, report.residual_norm)
        return Field(grid, values.reshape(grid.shape), order), report
