"""
Extension Service

Business logic layer for the extension problem: discrete energies, linear
Dirichlet solves, energy minimization, layer solutions, sliding profiles and
gradient bounds.
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.assembly import base_measure, cylinder_cell_mask, dirichlet_form, snap_height
from core.errors import DomainError, SolverError
from core.kernel_math import fractional_order, sign_extension_profile
from core.linear_solver import LinearDirichletSolver
from core.newton_solver import NewtonEnergySolver
from core.weighted_grid import (build_grid, cell_midpoints, default_grading, edge_mean, field_gradient,
                                weight_integrals)
from models.grid import BottomCondition, BoundarySpec, Field, TensorGrid
from models.kernel import FractionalOrder, Nonlinearity
from models.reports import EnergyBreakdown, EnergyRegion, GradientBounds, SolveReport

logger = logging.getLogger(__name__)


class ExtensionService:
    """Service layer for extension solves"""

    def __init__(self, linear_solver: Optional[LinearDirichletSolver] = None,
                 newton_solver: Optional[NewtonEnergySolver] = None):
        """
        Initialize extension service

        Args:
            linear_solver: solver for all-Dirichlet problems
            newton_solver: solver for the nonlinear Neumann problem
        """
        self.linear_solver = linear_solver or LinearDirichletSolver()
        self.newton_solver = newton_solver or NewtonEnergySolver()

    def energy_over(self, field: Field, nl: Nonlinearity, c_shift: float, cell_weights: np.ndarray,
                    base_weights: np.ndarray, region: EnergyRegion) -> EnergyBreakdown:
        """
        Energy with per-cell and per-base-node inclusion weights

        Args:
            field: extension field
            nl: nonlinearity providing G
            c_shift: constant subtracted from G
            cell_weights: weight of every cell's Dirichlet contribution
            base_weights: measure of every base node's share of the region
            region: region descriptor stored in the breakdown
        """
        form = dirichlet_form(field.grid, field.order)
        dirichlet = 0.5 * field.order.ds * float(
            np.sum(cell_weights * form.cell_energy(field.values))
        )
        G, clips = nl.potential(field.trace)
        if clips:
            logger.warning("%d trace values clipped to the range of %s", clips, nl.name)
        potential = float(np.sum(base_weights * (G - c_shift)))
        return EnergyBreakdown(
            dirichlet=dirichlet,
            potential=potential,
            region=region,
            s=field.s,
            c_shift=float(c_shift),
            clip_count=clips
        )

    def discrete_energy(self, field: Field, nl: Nonlinearity, c_shift: float = 0.0) -> EnergyBreakdown:
        """Energy of the field over its whole grid"""
        grid = field.grid
        return self.energy_over(
            field, nl, c_shift,
            np.ones(grid.cell_shape),
            base_measure(grid),
            EnergyRegion.cylinder(grid.R)
        )

    def solve_linear_dirichlet(self, grid: TensorGrid, s, bc: BoundarySpec,
                               tol: Optional[float] = None) -> Tuple[Field, SolveReport]:
        """Discrete weighted-harmonic extension of Dirichlet data"""
        order = s if isinstance(s, FractionalOrder) else fractional_order(s)
        return self.linear_solver.solve(grid, order, bc, tol=tol)

    def minimize_energy(self, grid: TensorGrid, s, nl: Nonlinearity, bc: BoundarySpec,
                        init: Field) -> Tuple[Field, SolveReport]:
        """Minimize the discrete energy with lateral/top Dirichlet data"""
        order = s if isinstance(s, FractionalOrder) else fractional_order(s)
        return self.newton_solver.solve(grid, order, nl, bc, init)

    def layer_boundary(self, grid: TensorGrid, s: float, nl: Nonlinearity) -> BoundarySpec:
        """Lateral data +-1, top data the far-field sign profile"""
        def data(x, lam):
            values = sign_extension_profile(s, x / grid.Lambda)
            values = np.where(x <= -grid.R, -1.0, values)
            return np.where(x >= grid.R, 1.0, values)
        return BoundarySpec.from_function(grid, data, bottom=BottomCondition.nonlinear_neumann(nl))

    def solve_layer(self, s: float, nl: Nonlinearity, R: float, Lambda: Optional[float] = None,
                    Nx: int = 256, Nlambda: int = 128, q: Optional[float] = None) -> Tuple[Field, SolveReport]:
        """
        Compute a one-dimensional layer solution

        Args:
            s: fractional order
            nl: double-well nonlinearity on [-1, 1]
            R: half-width of the solve window
            Lambda: cylinder height (defaults to R)
            Nx, Nlambda: cell counts
            q: grading exponent (defaults to clamp(1/(2s), 1, 4))

        Returns:
            (Field, SolveReport)
        """
        order = fractional_order(s)
        Lambda = R if Lambda is None else Lambda
        q = default_grading(s) if q is None else q
        if Nx % 2:
            logger.warning("odd Nx = %d leaves x = 0 off the grid", Nx)
        grid = build_grid(1, R, Lambda, Nx, Nlambda, q)
        bc = self.layer_boundary(grid, s, nl)

        x, lam = grid.coordinates()
        init_values = self.newton_solver.apply_dirichlet(grid, bc, np.tanh(x / (1.0 + lam)))
        init = Field(grid, init_values.reshape(grid.shape), order)

        logger.info("solving layer s=%.4g nl=%s R=%g grid %dx%d", s, nl.name, R, Nx, Nlambda)
        field, report = self.newton_solver.solve(grid, order, nl, bc, init)

        steps = np.diff(field.trace)
        if not np.all(steps > 0):
            report.converged = False
            report.message = (f"layer trace is not strictly increasing "
                              f"({int(np.count_nonzero(steps <= 0))} non-positive steps)")
            logger.error(report.message)
            raise SolverError(report.message, report)
        return field, report

    def sliding_energy_profile(self, field: Field, nl: Nonlinearity, t_list: Sequence[float],
                               R_window: float) -> List[EnergyBreakdown]:
        """
        Energies of the slid layer v^t(x, lambda) = v(x + t, lambda) on C_{R_window}

        Shifts are snapped to whole grid steps; the window is
        [t - R_window, t + R_window] x (0, R_window).
        """
        grid = field.grid
        steps = max(int(round(R_window / grid.hx)), 1)
        half = steps * grid.hx
        height = snap_height(grid, half)
        profile = []
        for t in t_list:
            shift = int(round(t / grid.hx)) * grid.hx
            if abs(shift) + half > grid.R * (1 + 1e-12):
                raise DomainError(
                    f"window [{shift - half}, {shift + half}] leaves the solve domain (-{grid.R}, {grid.R})"
                )
            cells = cylinder_cell_mask(grid, -half, half, height, center=shift)
            base = base_measure(grid, (-half, half), center=shift)
            profile.append(self.energy_over(
                field, nl, 0.0, cells.astype(float), base, EnergyRegion.cylinder(half, center=shift)
            ))
        return profile

    @staticmethod
    def sliding_decay(profile: List[EnergyBreakdown]) -> List[float]:
        """E(v^t) / E(v^0) along a sliding profile (first entry is the reference)"""
        reference = profile[0].total
        return [e.total / reference if reference else 0.0 for e in profile]

    def gradient_bounds(self, field: Field) -> GradientBounds:
        """
        Empirical constants (sup |grad_x v|, sup lambda |grad v|, sup |lambda^a d_lambda v|)
        over cell midpoints
        """
        grid = field.grid
        gradient = field_gradient(field)
        grad_x = float(np.max(np.sqrt(np.sum(gradient[..., :-1] ** 2, axis=-1))))
        lam_mid = cell_midpoints(grid)[-1]
        lambda_grad = float(np.max(lam_mid * np.sqrt(np.sum(gradient ** 2, axis=-1))))

        weights = weight_integrals(grid, field.order.a)
        lam_shape = (1,) * grid.n + (grid.nlambda,)
        flux = edge_mean(np.diff(field.values, axis=grid.n), grid.n) / weights.inverse_integrals.reshape(lam_shape)
        return GradientBounds(grad_x, lambda_grad, float(np.max(np.abs(flux))))

    def neumann_defect(self, field: Field, nl: Nonlinearity) -> float:
        """max |-d_s (weighted flux at lambda = 0) - f(trace)| over interior base nodes"""
        grid = field.grid
        weights = weight_integrals(grid, field.order.a)
        flux = (field.values[..., 1] - field.values[..., 0]) / weights.inverse_integrals[0]
        defect = -field.order.ds * flux - nl.force(field.trace)
        interior = tuple(slice(1, -1) for _ in range(grid.n))
        return float(np.max(np.abs(defect[interior])))

    def lift_layer(self, field: Field, n: int = 2) -> Field:
        """Extend a one-dimensional layer v(x_n, lambda) constantly in the other base variables"""
        grid = field.grid
        if grid.n != 1:
            raise DomainError("only one-dimensional layers can be lifted")
        if n not in (1, 2):
            raise DomainError(f"base dimension must be 1 or 2, got {n}")
        lifted = TensorGrid(
            n=n,
            R=grid.R,
            Lambda=grid.Lambda,
            x_nodes=tuple(grid.x.copy() for _ in range(n)),
            lambda_nodes=grid.lambda_nodes.copy(),
            q=grid.q
        )
        values = np.broadcast_to(field.values, lifted.shape).copy()
        return Field(lifted, values, field.order)
