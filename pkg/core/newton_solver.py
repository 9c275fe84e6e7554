"""
Newton Energy Minimizer

Damped Newton descent on

    E(v) = d_s/2 v^T K v + sum_i mu_i G(v_i)

over the free nodes (interior and bottom), with Dirichlet data on the
lateral and top faces. mu_i is the dual-cell measure of bottom node i, so the
nonlinear Neumann condition is the natural boundary condition.
"""

import logging
from typing import Tuple

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as splinalg

from core.assembly import base_measure
from core.base_solver import BaseSolver
from core.errors import DomainError
from models.grid import BoundarySpec, Field, TensorGrid
from models.kernel import FractionalOrder, Nonlinearity
from models.reports import SolveReport

logger = logging.getLogger(__name__)


class NewtonEnergySolver(BaseSolver):
    """Monotone energy descent with Armijo backtracking and gradient fallback"""

    def __init__(self, tol: float = 1e-8, max_iter: int = 200, armijo: float = 1e-4,
                 max_backtracks: int = 30, stall_tol: float = 1e-6):
        super().__init__(tol, max_iter)
        self.armijo = float(armijo)
        self.max_backtracks = int(max_backtracks)
        self.stall_tol = float(stall_tol)

    def _energy(self, K, ds, mu, nl, bottom, v):
        G, clips = nl.potential(v[bottom])
        return 0.5 * ds * float(v @ (K @ v)) + float(mu @ G), clips

    def _gradient(self, K, ds, mu, nl, bottom, v):
        g = ds * (K @ v)
        g[bottom] -= mu * nl.force(v[bottom])
        return g

    def _line_search(self, energy_fn, v, direction, energy, slope):
        """Armijo backtracking; returns (step, new energy) or (0, energy)"""
        step = 1.0
        for _ in range(self.max_backtracks):
            trial, _ = energy_fn(v + step * direction)
            if trial <= energy + self.armijo * step * slope and trial <= energy:
                return step, trial
            step *= 0.5
        return 0.0, energy

    def solve(self, grid: TensorGrid, order: FractionalOrder, nl: Nonlinearity,
              bc: BoundarySpec, init: Field) -> Tuple[Field, SolveReport]:
        """
        Minimize the discrete energy

        Args:
            grid: grid of the cylinder
            order: fractional order
            nl: nonlinearity coupled on the bottom face
            bc: lateral/top Dirichlet data with a nonlinear Neumann bottom
            init: initial field respecting the Dirichlet data

        Returns:
            (Field, SolveReport)
        """
        if bc.bottom.is_dirichlet:
            raise DomainError("energy minimization needs a nonlinear Neumann bottom")
        if init.values.shape != grid.shape:
            raise DomainError("initial field does not live on the solve grid")
        self.check_dirichlet(grid, bc, init.values)

        form = self.form(grid, order)
        K = form.matrix()
        ds = order.ds
        fixed, free = self.split_nodes(grid, bc)
        bottom = grid.bottom_indices()
        mu = base_measure(grid).reshape(-1)[
            np.ravel_multi_index(np.unravel_index(bottom, grid.shape)[:-1], grid.shape[:-1])
        ]
        # bottom nodes as positions inside the free vector
        free_pos = np.full(grid.num_nodes, -1)
        free_pos[free] = np.arange(free.size)
        bottom_free = free_pos[bottom]

        v = np.array(init.values, dtype=float).reshape(-1)
        energy_fn = lambda w: self._energy(K, ds, mu, nl, bottom, w)
        energy, clips = energy_fn(v)
        report = SolveReport(
            iterations=0,
            final_energy=energy,
            energy_history=[energy],
            residual_norm=0.0,
            converged=False,
            method='newton',
            clip_count=clips
        )
        K_ff = K[free][:, free].tocsc()

        for iteration in range(self.max_iter + 1):
            g = self._gradient(K, ds, mu, nl, bottom, v)[free]
            gnorm = float(np.linalg.norm(g))
            report.residual_norm = gnorm
            if gnorm <= self.tol * (1.0 + abs(energy)):
                report.converged = True
                break
            if iteration == self.max_iter:
                break

            curvature = np.zeros(free.size)
            curvature[bottom_free] = -mu * nl.stiffness(v[bottom])
            H = (ds * K_ff + sparse.diags(curvature)).tocsc()
            direction = self._newton_direction(H, g)
            if direction is None or float(g @ direction) >= 0.0:
                H_mod = (ds * K_ff + sparse.diags(np.maximum(curvature, 0.0))).tocsc()
                direction = splinalg.spsolve(H_mod, -g)
            else:
                H_mod = None

            full_direction = np.zeros_like(v)
            full_direction[free] = direction
            step, trial = self._line_search(energy_fn, v, full_direction, energy, float(g @ direction))

            if step == 0.0:
                # gradient descent, Jacobi-scaled
                if H_mod is None:
                    H_mod = (ds * K_ff + sparse.diags(np.maximum(curvature, 0.0))).tocsc()
                full_direction[free] = -g / H_mod.diagonal()
                step, trial = self._line_search(energy_fn, v, full_direction, energy,
                                                float(g @ full_direction[free]))
                if step > 0.0:
                    report.fallback_steps += 1
                    logger.warning("line search stalled at iteration %d, took a gradient step", iteration)

            if step == 0.0:
                if gnorm <= self.stall_tol * (1.0 + abs(energy)):
                    # returned but not converged: callers see stalled and decide
                    logger.warning("descent stalled at gradient norm %.3e above the tolerance %.3e",
                                   gnorm, self.tol * (1.0 + abs(energy)))
                    report.stalled = True
                    report.message = f"stalled at gradient norm {gnorm:.3e}"
                    break
                report.iterations = iteration
                report.final_energy = energy
                self._handle_failure(f"line search failed at gradient norm {gnorm:.3e}", report)

            v = v + step * full_direction
            energy = trial
            _, clips = nl.clip(v[bottom])
            if clips:
                logger.warning("%d trace values outside the nonlinearity range", clips)
            report.clip_count = max(report.clip_count, clips)
            report.energy_history.append(energy)
            report.iterations = iteration + 1

        report.final_energy = energy
        if not report.converged and not report.stalled:
            self._handle_failure(
                f"no convergence within {self.max_iter} Newton iterations "
                f"(gradient norm {report.residual_norm:.3e})", report
            )
        if report.converged:
            logger.info("newton converged in %d iterations, energy %.12g", report.iterations, energy)
        return Field(grid, v.reshape(grid.shape), order), report

    @staticmethod
    def _newton_direction(H, g):
        try:
            direction = splinalg.spsolve(H, -g)
        except RuntimeError:
            return None
        if not np.all(np.isfinite(direction)):
            return None
        return direction
