"""
Comparison Service

Service for the comparison-function energy argument and the boundary
extension inequalities on the unit cylinder.
"""

import logging
from typing import Callable, List, Optional, Tuple

import numpy as np

from core.assembly import base_measure, dirichlet_form
from core.errors import DomainError
from core.fracnorm import CylinderBoundary, psi_s, psi_terms
from core.kernel_math import bound_integral, fractional_order, potential_max, potential_min
from core.weighted_grid import build_grid, default_grading, interpolate_field, rescale_field
from models.grid import BottomCondition, BoundarySpec, Field
from models.kernel import Nonlinearity
from models.reports import ComparisonReport, ExtensionCheck, PsiReport
from services.extension_service import ExtensionService

logger = logging.getLogger(__name__)

BoundaryTrace = Callable[[np.ndarray], np.ndarray]

SURFACE_CELL_WARNING = 20000


def cutoff(x_sup: np.ndarray, R: float) -> np.ndarray:
    """Quintic smoothstep: 1 for |x|_inf <= R-1, 0 for |x|_inf >= R, C^2 in between"""
    t = np.clip(R - np.asarray(x_sup, dtype=float), 0.0, 1.0)
    return t ** 3 * (10.0 - 15.0 * t + 6.0 * t ** 2)


class ComparisonService:
    """Service for comparison functions and extension inequalities"""

    def __init__(self, extension_service: ExtensionService):
        """
        Initialize comparison service

        Args:
            extension_service: extension solve service instance
        """
        self.extension_service = extension_service

    def comparison_function(self, v_field: Field, nl: Nonlinearity, R: Optional[float] = None,
                            tau: Optional[float] = None) -> Tuple[Field, ComparisonReport]:
        """
        Build the cut-off competitor of a minimizer and compare energies

        Args:
            v_field: converged minimizer on C_R
            nl: its nonlinearity
            R: cylinder half-width (the grid's own by default)
            tau: freezing value (smallest minimizer of G over the trace range by default)

        Returns:
            (wbar, ComparisonReport)
        """
        grid = v_field.grid
        R = grid.R if R is None else float(R)
        if R <= 2.0:
            raise DomainError(f"comparison needs R > 2, got {R}")
        if abs(R - grid.R) > 0.5 * grid.hx:
            raise DomainError(f"R = {R} does not match the field's cylinder half-width {grid.R}")

        trace = v_field.trace
        restricted = nl.restrict(float(np.min(trace)), float(np.max(trace)))
        minimum = potential_min(restricted)
        tau = minimum.tau if tau is None else float(tau)
        c_u = float(nl.potential(np.array([tau]))[0][0])

        x_sup = np.max(np.abs(np.stack(grid.base_coordinates())), axis=0)
        eta = cutoff(x_sup, grid.R)
        g = tau * eta + (1.0 - eta) * trace
        bc = BoundarySpec.from_values(
            grid, v_field.values,
            bottom=BottomCondition.dirichlet(g.reshape(-1)[self._bottom_in_base(grid)])
        )
        wbar, _ = self.extension_service.solve_linear_dirichlet(grid, v_field.order, bc)

        E_v = self.extension_service.discrete_energy(v_field, nl, c_shift=c_u).total
        E_wbar_parts = self.extension_service.discrete_energy(wbar, nl, c_shift=c_u)
        E_wbar = E_wbar_parts.total

        n, s = grid.n, v_field.s
        shell = base_measure(grid) * (x_sup > grid.R - 1.0)
        G_max = max(potential_max(restricted), float(np.max(nl.potential(g)[0])))
        potential_bound = (G_max - c_u) * float(np.sum(shell))

        rescaled = rescale_field(wbar, grid.R)
        D1 = 0.5 * v_field.order.ds * dirichlet_form(rescaled.grid, rescaled.order).energy(rescaled.values)

        report = ComparisonReport(
            R=grid.R,
            s=s,
            tau=tau,
            c_u=c_u,
            E_v=E_v,
            E_wbar=E_wbar,
            bound=grid.R ** (n - 2.0 * s) * bound_integral(s, 1.0 / grid.R),
            minimality_ok=bool(E_v <= E_wbar + 1e-8 * (1.0 + abs(E_wbar))),
            potential_wbar=E_wbar_parts.potential,
            potential_bound=potential_bound,
            dirichlet_rescaled=D1
        )
        logger.info("comparison R=%g s=%.3f: E_v=%.6g E_wbar=%.6g ok=%s",
                    grid.R, s, E_v, E_wbar, report.minimality_ok)
        return wbar, report

    @staticmethod
    def _bottom_in_base(grid) -> np.ndarray:
        """Positions of the bottom nodes inside the flattened base layer"""
        bottom = grid.bottom_indices()
        return np.ravel_multi_index(np.unravel_index(bottom, grid.shape)[:-1], grid.shape[:-1])

    @staticmethod
    def comparison_trace(wbar: Field) -> BoundaryTrace:
        """Trace of the rescaled competitor on the boundary of C_1"""
        rescaled = rescale_field(wbar, wbar.grid.R)
        return lambda points: interpolate_field(rescaled, points)

    @staticmethod
    def surface_resolution(epsilon: float, cells_per_unit: int = 8, cells_per_eps: int = 4) -> int:
        """Surface cells per unit length: at least cells_per_eps cells across a transition of width epsilon"""
        if cells_per_eps <= 0:
            return int(cells_per_unit)
        return max(int(cells_per_unit), int(np.ceil(cells_per_eps / epsilon - 1e-9)))

    def psi_for_trace(self, w: BoundaryTrace, s: float, epsilon: float, n: int = 1,
                      cells_per_unit: int = 8, cells_per_eps: int = 4) -> PsiReport:
        m = self.surface_resolution(epsilon, cells_per_unit, cells_per_eps)
        boundary = CylinderBoundary.build(n, m)
        if len(boundary.centers) > SURFACE_CELL_WARNING:
            logger.warning("boundary functional on %d surface cells (%d per unit)", len(boundary.centers), m)
        return psi_s(w, boundary, s, epsilon)

    def extension_inequality_check(self, w: BoundaryTrace, s: float, n: int = 1,
                                   cells_per_unit: int = 8, Nx: int = 32, Nlambda: int = 32,
                                   tol: Optional[float] = None) -> ExtensionCheck:
        """
        Weighted Dirichlet energy of the weighted-harmonic extension of w on C_1
        against the boundary terms of the extension inequality

        Args:
            w: trace, callable on points of shape (..., n+1)
            s: fractional order
            n: base dimension
            cells_per_unit: surface mesh density of the boundary terms
            Nx, Nlambda: volume grid of the extension solve
            tol: CG tolerance (solver default when omitted)

        Returns:
            ExtensionCheck
        """
        order = fractional_order(s)
        grid = build_grid(n, 1.0, 1.0, Nx, Nlambda, default_grading(s))
        coordinates = np.stack(grid.coordinates(), axis=-1)
        values = np.asarray(w(coordinates), dtype=float)
        bc = BoundarySpec.from_values(grid, values)
        extension, _ = self.extension_service.solve_linear_dirichlet(grid, order, bc, tol=tol)
        lhs = dirichlet_form(grid, order).energy(extension.values)

        boundary = CylinderBoundary.build(n, cells_per_unit)
        rhs = float(sum(psi_terms(w, boundary, s)))
        return ExtensionCheck(lhs=lhs, rhs=rhs, s=float(s), cells_per_unit=int(cells_per_unit))

    @staticmethod
    def random_smooth_traces(count: int, n: int, seed: int, modes: int = 3,
                             band: Tuple[float, float] = (1.0, 3.0)) -> List[BoundaryTrace]:
        """
        Seeded random trigonometric traces on R^(n+1)

        No constant offset, and every mode has |k| inside ``band``.
        """
        rng = np.random.default_rng(seed)
        traces = []
        for _ in range(count):
            directions = rng.normal(size=(modes, n + 1))
            directions /= np.linalg.norm(directions, axis=1, keepdims=True)
            frequencies = directions * rng.uniform(band[0], band[1], size=(modes, 1))
            amplitudes = rng.normal(0.0, 1.0, size=modes) / np.sqrt(modes)
            phases = rng.uniform(0.0, 2.0 * np.pi, size=modes)

            def trace(points, k=frequencies, c=amplitudes, p=phases):
                points = np.asarray(points, dtype=float)
                return np.cos(points @ k.T + p) @ c

            traces.append(trace)
        return traces
