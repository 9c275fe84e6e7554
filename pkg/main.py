#!/usr/bin/env python3
"""
Fractional Layer Lab (csx)

Command-line driver for numerical experiments on the extension formulation
of fractional Allen-Cahn type equations: layer solutions, energy growth
scans, the monotonicity formula, the Pohozaev identity, the boundary
functional and the comparison-function argument.
"""

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

# Add project root to path for imports
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from config.settings import Settings, settings
from core.errors import ConfigError, CSXError, InvariantViolation, UnexpectedError
from core.fracnorm import CylinderBoundary, trace_hypothesis_constant
from core.kernel_math import ds_limits, explicit_half_layer, fractional_order, make_nonlinearity
from core.linear_solver import LinearDirichletSolver
from core.newton_solver import NewtonEnergySolver
from core.weighted_grid import build_grid, default_grading, dump_field
from models.grid import Field
from models.kernel import Nonlinearity
from models.reports import SolveReport
from models.run_config import FORMATS, NONLINEARITIES, RunConfig
from services.comparison_service import ComparisonService
from services.energy_service import EnergyService
from services.extension_service import ExtensionService
from utils.config_loader import build_run_config
from utils.helpers import create_output_data, create_output_data_dict, save_table, save_to_json, spread
from utils.html_reporter import HTMLReporter

logger = logging.getLogger('csx')

Check = Dict[str, Any]
CommandResult = Tuple[List[Check], Dict[str, Any]]


def setup_logging(config: Settings):
    """Configure the root logger from the logging settings"""
    log_config = config.get_logging_config()
    level = getattr(logging, str(log_config.get('level', 'INFO')).upper(), logging.INFO)
    handlers = [logging.StreamHandler(sys.stderr)]
    if log_config.get('file'):
        directory = os.path.dirname(log_config['file'])
        if directory:
            os.makedirs(directory, exist_ok=True)
        handlers.append(logging.FileHandler(log_config['file'], encoding='utf-8'))
    logging.basicConfig(
        level=level,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
        handlers=handlers,
        force=True
    )


def initialize_services(run: RunConfig) -> Dict[str, Any]:
    """Initialize solvers and service layers from the solver settings"""
    solver = run.solver
    linear = LinearDirichletSolver(tol=solver.get('linear_tol', 1e-10))
    newton = NewtonEnergySolver(
        tol=solver.get('newton_tol', 1e-8),
        max_iter=solver.get('max_newton', 200),
        armijo=solver.get('armijo', 1e-4),
        max_backtracks=solver.get('max_backtracks', 30),
        stall_tol=solver.get('stall_tol', 1e-6)
    )
    extension = ExtensionService(linear, newton)
    return {
        'extension': extension,
        'energy': EnergyService(extension),
        'comparison': ComparisonService(extension)
    }


def run_parallel(tasks: Sequence[Callable[[], Any]], threads: int, desc: str) -> List[Any]:
    """Run independent scan points; results come back in submission order"""
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        futures = [pool.submit(task) for task in tasks]
        return [future.result() for future in tqdm(futures, desc=desc, disable=len(futures) < 2)]


def check(name: str, passed: bool, value: Any = None, threshold: Any = None, detail: str = '') -> Check:
    entry = {'name': name, 'passed': bool(passed), 'detail': detail}
    if value is not None:
        entry['value'] = value
    if threshold is not None:
        entry['threshold'] = threshold
    return entry


def soft_checks(run: RunConfig, label: str, report: SolveReport, clips: int = 0) -> List[Check]:
    """Clipping and gradient-descent fallbacks become failures under --strict"""
    if not run.strict:
        return []
    return [
        check(f"{label} no clipping", report.clip_count + clips == 0, report.clip_count + clips, 0),
        check(f"{label} no gradient fallback", report.fallback_steps == 0, report.fallback_steps, 0)
    ]


def output_path(run: RunConfig, name: str) -> str:
    return os.path.join(run.output, name)


def s_label(s: float) -> str:
    return f"s{s:g}"


def nonlinearity(run: RunConfig) -> Nonlinearity:
    return make_nonlinearity(run.nonlinearity)


def solve_window(services: Dict[str, Any], run: RunConfig, s: float, nl: Nonlinearity,
                 R: float) -> Tuple[Field, SolveReport]:
    """Layer on (-R, R) x (0, Lambda), lifted to the configured base dimension"""
    field, report = services['extension'].solve_layer(
        s, nl, R, Lambda=run.Lambda, Nx=run.nx, Nlambda=run.nlambda, q=run.q
    )
    if run.n == 2:
        field = services['extension'].lift_layer(field, 2)
    return field, report


def constant_field(run: RunConfig, s: float, R: float) -> Field:
    grid = build_grid(run.n, R, R, run.nx, run.nlambda, run.q or default_grading(s))
    return Field(grid, np.full(grid.shape, float(run.constant)), fractional_order(s))


def cmd_dsconst(run: RunConfig, services: Dict[str, Any]) -> CommandResult:
    """Table of d_s with its two normalised limits"""
    print("\n=== d_s constants ===")
    rows = []
    checks = []
    for s in run.s_list:
        limits = ds_limits(s)
        rows.append([limits['s'], limits['ds'], limits['two_s_ds'], limits['ds_over_two_one_minus_s']])
        print(f"  s={s:<8.4g} d_s={limits['ds']:.10g}  2s*d_s={limits['two_s_ds']:.6g}  "
              f"d_s/(2(1-s))={limits['ds_over_two_one_minus_s']:.6g}")
        checks.append(check(f"d_s finite at s={s:g}", np.isfinite(limits['ds']) and limits['ds'] > 0, limits['ds']))
    path = save_table(rows, ['s', 'd_s', 'two_s_d_s', 'd_s_over_two_one_minus_s'],
                      output_path(run, 'dsconst'), run.format)
    print(f"✓ Table saved to {path}")
    return checks, {'values': len(rows)}


def cmd_layer(run: RunConfig, services: Dict[str, Any]) -> CommandResult:
    """Layer solutions for every s on the largest window"""
    if run.n != 1:
        raise ConfigError("layer solutions are computed in one base dimension (use --n 1)")
    print("\n=== Layer solutions ===")
    nl = nonlinearity(run)
    R = max(run.R_list)
    extension = services['extension']
    results = run_parallel(
        [lambda s=s: extension.solve_layer(s, nl, R, Lambda=run.Lambda, Nx=run.nx,
                                           Nlambda=run.nlambda, q=run.q)
         for s in run.s_list],
        run.threads, "layers"
    )

    checks = []
    linf_tol = run.tolerance('layer_linf', 2e-2)
    slack = run.tolerance('sliding', 1e-3)
    final_tol = run.tolerance('sliding_final', 0.2)
    for s, (field, report) in zip(run.s_list, results):
        label = s_label(s)
        dump_field(field, output_path(run, f"layer_{label}.csx"))
        bounds = extension.gradient_bounds(field)
        save_to_json(create_output_data_dict({
            'solve_report': report.to_dict(),
            'gradient_bounds': bounds._asdict(),
            'neumann_defect': extension.neumann_defect(field, nl)
        }, 'layer_report'), output_path(run, f"layer_{label}_report.json"))
        save_table(np.column_stack([field.grid.x, field.trace]).tolist(), ['x', 'u'],
                   output_path(run, f"layer_{label}_trace"), run.format)
        print(f"✓ s={s:g}: {report.iterations} Newton steps, energy {report.final_energy:.8g}")

        checks.append(check(f"layer {label} converged", report.converged, report.residual_norm))
        checks.append(check(f"layer {label} energy decreasing", report.is_monotone()))
        if nl.odd and run.nx % 2 == 0:
            middle = float(field.trace[run.nx // 2])
            checks.append(check(f"layer {label} u(0) = 0", abs(middle) <= 1e-6, abs(middle), 1e-6))
        if nl.name == 'sine_halfs' and abs(s - 0.5) < 1e-12:
            near = np.abs(field.grid.x) <= 10.0
            error = float(np.max(np.abs(field.trace[near] - explicit_half_layer(field.grid.x[near], 0.0))))
            checks.append(check(f"layer {label} matches arctan profile", error <= linf_tol, error, linf_tol))

        window = R / 4.0
        shifts = np.linspace(0.0, R - window, 7)
        profile = extension.sliding_energy_profile(field, nl, shifts, window)
        decay = extension.sliding_decay(profile)
        save_table([[e.region.center, e.total, d] for e, d in zip(profile, decay)],
                   ['t', 'energy', 'relative'], output_path(run, f"layer_{label}_sliding"), run.format)
        steps_ok = all(b <= a + slack for a, b in zip(decay, decay[1:]))
        checks.append(check(f"sliding {label} nonincreasing", steps_ok, max(np.diff(decay), default=0.0), slack))
        checks.append(check(f"sliding {label} decays", decay[-1] <= final_tol, decay[-1], final_tol))
        checks.extend(soft_checks(run, f"layer {label}", report, sum(e.clip_count for e in profile)))

    return checks, {'R': R, 'nonlinearity': nl.name, 'grid': f"{run.nx}x{run.nlambda}"}


def cmd_energy_scan(run: RunConfig, services: Dict[str, Any]) -> CommandResult:
    """Cylinder energies over R and the growth law they follow"""
    print("\n=== Energy growth scan ===")
    nl = nonlinearity(run)
    extension = services['extension']
    energy = services['energy']

    def point(s, R):
        field, report = extension.solve_layer(s, nl, run.solve_factor * R, Lambda=run.Lambda,
                                              Nx=run.nx, Nlambda=run.nlambda, q=run.q)
        breakdown = energy.energy_cylinder(field, nl, R)
        # constant in the extra base variables, so the n-dimensional energy factors
        lift = (2.0 * breakdown.region.radius) ** (run.n - 1)
        return breakdown, report, lift

    pairs = [(s, R) for s in run.s_list for R in run.R_list]
    results = run_parallel([lambda s=s, R=R: point(s, R) for s, R in pairs], run.threads, "energy scan")

    rows = []
    checks = []
    fits = []
    for s in run.s_list:
        scan = [(R, result) for (s_point, R), result in zip(pairs, results) if s_point == s]
        radii = [b.region.radius for _, (b, _, _) in scan]
        energies = [lift * b.total for _, (b, _, lift) in scan]
        for (R, (b, report, lift)), E in zip(scan, energies):
            rows.append([s, b.region.radius, E, lift * b.dirichlet, lift * b.potential,
                         report.iterations, report.converged])
            checks.append(check(f"converged {s_label(s)} R={R:g}", report.converged, report.residual_norm,
                                detail=report.message))
            checks.extend(soft_checks(run, f"{s_label(s)} R={R:g}", report, b.clip_count))
        if len(radii) >= 3:
            fit = energy.growth_fit(radii, energies, s, run.n)
            fits.append(fit.to_dict())
            print(f"  s={s:g}: slope {fit.slope:.4f}, regime {fit.regime} (expected {fit.expected_regime}), "
                  f"leading {fit.leading:.4g}, offset {fit.offset:.4g}")
            checks.append(check(f"growth {s_label(s)} {fit.expected_regime} law", fit.meets_tolerance,
                                fit.acceptance_value, detail=f"log-log slope {fit.slope:.4f}, "
                                                         f"classified {fit.regime}"))
        else:
            logger.warning("growth fit at s=%g skipped: needs at least 3 radii", s)

    path = save_table(rows, ['s', 'R', 'energy', 'dirichlet', 'potential', 'newton_iterations', 'converged'],
                      output_path(run, 'energy_scan'), run.format)
    save_to_json(create_output_data(fits, 'growth_fit'), output_path(run, 'growth_fit.json'))
    print(f"✓ Energies saved to {path}")
    return checks, {'points': len(rows), 'n': run.n, 'nonlinearity': nl.name}


def cmd_monotonicity(run: RunConfig, services: Dict[str, Any]) -> CommandResult:
    """phi(R) over the configured radii, plus the cylinder lower bound"""
    print("\n=== Monotonicity formula ===")
    nl = nonlinearity(run)
    energy = services['energy']
    R_max = max(run.R_list)
    slack = run.tolerance('monotonicity', 1e-3)

    if run.constant is not None:
        return _constant_monotonicity(run, energy, nl, R_max)

    results = run_parallel([lambda s=s: solve_window(services, run, s, nl, run.solve_factor * R_max)
                            for s in run.s_list], run.threads, "monotonicity")
    rows = []
    checks = []
    for s, (field, report) in zip(run.s_list, results):
        label = s_label(s)
        profile = energy.phi_profile(field, nl, run.R_list)
        for radius, phi in profile:
            terms = energy.phi_derivative_terms(field, nl, radius)
            rows.append([s, radius, phi, terms['normal_term'], terms['potential_term']])
        checks.append(check(f"phi {label} nondecreasing", energy.is_nondecreasing(profile, slack),
                            min(b / a for (_, a), (_, b) in zip(profile, profile[1:])) if len(profile) > 1 else 1.0,
                            1.0 - slack))

        cylinders = [energy.energy_cylinder(field, nl, radius).total for radius, _ in profile]
        lower = energy.lower_bound_check([r for r, _ in profile], cylinders, profile[0][1], profile[0][0],
                                         s, run.n, slack)
        checks.append(check(f"lower bound {label}", lower.passed, min(lower.ratios, default=1.0), 1.0 - slack))
        checks.append(check(f"converged {label}", report.converged, report.residual_norm, detail=report.message))
        checks.extend(soft_checks(run, f"monotonicity {label}", report))
        print(f"  s={s:g}: phi = " + ", ".join(f"{phi:.6g}" for _, phi in profile))

    path = save_table(rows, ['s', 'R', 'phi', 'normal_term', 'potential_term'],
                      output_path(run, 'monotonicity'), run.format)
    print(f"✓ Profile saved to {path}")
    return checks, {'radii': len(run.R_list), 'n': run.n, 'nonlinearity': nl.name}


def _constant_monotonicity(run: RunConfig, energy: EnergyService, nl: Nonlinearity, R_max: float) -> CommandResult:
    """phi of a constant field against its closed form G(c) |B_R| / R^(n-2s)"""
    G = float(nl.potential(np.array([run.constant]))[0][0])
    tolerance = 1e-10 if run.n == 1 else 1e-2
    rows = []
    checks = []
    for s in run.s_list:
        field = constant_field(run, s, R_max)
        for radius, phi in energy.phi_profile(field, nl, run.R_list):
            ball = 2.0 * radius if run.n == 1 else np.pi * radius ** 2
            expected = G * ball / radius ** (run.n - 2.0 * s)
            error = abs(phi - expected) / max(abs(expected), 1e-300)
            rows.append([s, radius, phi, expected])
            checks.append(check(f"constant phi {s_label(s)} R={radius:g}",
                                error <= tolerance or abs(phi - expected) <= 1e-14, error, tolerance))
    path = save_table(rows, ['s', 'R', 'phi', 'closed_form'], output_path(run, 'monotonicity_constant'), run.format)
    print(f"✓ Constant-field profile saved to {path}")
    return checks, {'constant': run.constant, 'G': G, 'n': run.n}


def cmd_pohozaev(run: RunConfig, services: Dict[str, Any]) -> CommandResult:
    """Relative residual of the Pohozaev identity on half-balls"""
    print("\n=== Pohozaev identity ===")
    nl = nonlinearity(run)
    energy = services['energy']
    R_max = max(run.R_list)
    if run.constant is not None:
        fields = [(constant_field(run, s, R_max), None) for s in run.s_list]
        tolerance = 1e-12 if run.n == 1 else run.tolerance('pohozaev', 0.05)
    else:
        fields = run_parallel([lambda s=s: solve_window(services, run, s, nl, run.solve_factor * R_max)
                               for s in run.s_list], run.threads, "pohozaev")
        tolerance = run.tolerance('pohozaev', 0.05)

    rows = []
    checks = []
    for s, (field, report) in zip(run.s_list, fields):
        for R in run.R_list:
            result = energy.pohozaev_residual(field, nl, R)
            rows.append([s, result.radius, result.lhs, result.rhs, result.lhs_bulk, result.lhs_potential,
                         result.rhs_grad, result.rhs_normal, result.rhs_potential, result.relative_residual])
            checks.append(check(f"pohozaev {s_label(s)} R={result.radius:g}",
                                result.relative_residual <= tolerance, result.relative_residual, tolerance))
            print(f"  s={s:g} R={result.radius:g}: residual {result.relative_residual:.3e}")
        if report is not None:
            checks.append(check(f"converged {s_label(s)}", report.converged, report.residual_norm,
                                detail=report.message))
            checks.extend(soft_checks(run, f"pohozaev {s_label(s)}", report))

    path = save_table(rows, ['s', 'R', 'lhs', 'rhs', 'lhs_bulk', 'lhs_potential', 'rhs_grad', 'rhs_normal',
                             'rhs_potential', 'relative_residual'],
                      output_path(run, 'pohozaev'), run.format)
    print(f"✓ Residuals saved to {path}")
    return checks, {'radii': len(run.R_list), 'n': run.n, 'tolerance': tolerance}


def cmd_psi_scan(run: RunConfig, services: Dict[str, Any]) -> CommandResult:
    """Boundary functional of the rescaled comparison traces over epsilon, with R = 1/epsilon"""
    print("\n=== Boundary functional scan ===")
    nl = nonlinearity(run)
    comparison = services['comparison']

    def point(s, eps):
        field, report = solve_window(services, run, s, nl, 1.0 / eps)
        wbar, _ = comparison.comparison_function(field, nl)
        trace = comparison.comparison_trace(wbar)
        m = comparison.surface_resolution(eps, run.cells_per_unit, run.cells_per_eps)
        psi = comparison.psi_for_trace(trace, s, eps, n=run.n, cells_per_unit=run.cells_per_unit,
                                       cells_per_eps=run.cells_per_eps)
        return psi, trace_hypothesis_constant(trace, CylinderBoundary.build(run.n, m), s, eps), report, m

    pairs = [(s, eps) for s in run.s_list for eps in run.eps_list]
    results = run_parallel([lambda s=s, e=eps: point(s, e) for s, eps in pairs], run.threads, "psi scan")

    rows = []
    checks = []
    limit = run.tolerance('psi_spread', 3.0)
    for s in run.s_list:
        ratios = []
        for (s_point, eps), (psi, constant, report, m) in zip(pairs, results):
            if s_point != s:
                continue
            ratios.append(psi.ratio)
            rows.append([s, eps, 1.0 / eps, m, psi.l2_term, psi.frac_term, psi.weig_term, psi.total,
                         psi.bound_integral, psi.ratio, constant])
            checks.append(check(f"converged psi {s_label(s)} eps={eps:g}", report.converged,
                                report.residual_norm, detail=report.message))
            checks.extend(soft_checks(run, f"psi {s_label(s)} eps={eps:g}", report))
        if len(ratios) > 1:
            checks.append(check(f"psi ratio spread {s_label(s)}", spread(ratios) <= limit, spread(ratios), limit))
        print(f"  s={s:g}: ratios " + ", ".join(f"{r:.4g}" for r in ratios))

    path = save_table(rows, ['s', 'epsilon', 'R', 'cells_per_unit', 'l2', 'frac', 'weig', 'psi',
                             'bound_integral', 'ratio', 'hypothesis_constant'],
                      output_path(run, 'psi_scan'), run.format)
    print(f"✓ Boundary functional saved to {path}")
    return checks, {'epsilons': len(run.eps_list), 'cells_per_unit': run.cells_per_unit,
                    'cells_per_eps': run.cells_per_eps}


def cmd_compare(run: RunConfig, services: Dict[str, Any]) -> CommandResult:
    """Minimizer against its cut-off competitor over the (s, R) matrix"""
    print("\n=== Comparison function ===")
    nl = nonlinearity(run)
    comparison = services['comparison']

    def point(s, R):
        field, report = solve_window(services, run, s, nl, R)
        _, result = comparison.comparison_function(field, nl)
        return result, report

    pairs = [(s, R) for s in run.s_list for R in run.R_list]
    results = run_parallel([lambda s=s, R=R: point(s, R) for s, R in pairs], run.threads, "comparison")

    rows = []
    checks = []
    limit = run.tolerance('ratio_spread', 3.0)
    for s in run.s_list:
        ratios = []
        for (s_point, R), (result, report) in zip(pairs, results):
            if s_point != s:
                continue
            label = f"{s_label(s)} R={R:g}"
            ratios.append(result.ratio)
            checks.append(check(f"converged {label}", report.converged, report.residual_norm, detail=report.message))
            rows.append([s, result.R, result.tau, result.c_u, result.E_v, result.E_wbar, result.bound,
                         result.ratio, result.potential_wbar, result.potential_bound,
                         result.dirichlet_rescaled, result.minimality_ok])
            checks.append(check(f"minimality {label}", result.minimality_ok, result.E_wbar - result.E_v))
            checks.append(check(f"potential bound {label}", result.potential_ok,
                                result.potential_wbar, result.potential_bound))
            scaled = result.R ** (run.n - 2.0 * s) * result.dirichlet_rescaled
            dirichlet = result.E_wbar - result.potential_wbar
            error = abs(scaled - dirichlet) / max(abs(dirichlet), 1e-300)
            checks.append(check(f"scaling identity {label}", error <= 0.02, error, 0.02))
            checks.extend(soft_checks(run, label, report))
        if len(ratios) > 1:
            checks.append(check(f"comparison ratio spread {s_label(s)}", spread(ratios) <= limit,
                                spread(ratios), limit))
        print(f"  s={s:g}: E(wbar)/bound = " + ", ".join(f"{r:.4g}" for r in ratios))

    path = save_table(rows, ['s', 'R', 'tau', 'c_u', 'E_v', 'E_wbar', 'bound', 'ratio', 'potential_wbar',
                             'potential_bound', 'dirichlet_rescaled', 'minimality_ok'],
                      output_path(run, 'compare'), run.format)
    print(f"✓ Comparison saved to {path}")
    return checks, {'points': len(rows), 'n': run.n, 'nonlinearity': nl.name}


def cmd_extension(run: RunConfig, services: Dict[str, Any]) -> CommandResult:
    """Extension inequality over seeded random traces and one surface-mesh halving"""
    print("\n=== Extension inequality ===")
    comparison = services['comparison']
    traces = comparison.random_smooth_traces(run.traces, run.n, run.seed)
    coarse, fine = run.cells_per_unit, 2 * run.cells_per_unit

    def point(s, w):
        return (comparison.extension_inequality_check(w, s, run.n, cells_per_unit=coarse),
                comparison.extension_inequality_check(w, s, run.n, cells_per_unit=fine))

    pairs = [(s, k) for s in run.s_list for k in range(len(traces))]
    results = run_parallel([lambda s=s, k=k: point(s, traces[k]) for s, k in pairs], run.threads, "extension")

    rows = []
    checks = []
    spread_limit = run.tolerance('extension_spread', 2.0)
    drift_limit = run.tolerance('extension_drift', 0.3)
    for s in run.s_list:
        ratios = []
        fine_ratios = []
        drifts = []
        for (s_point, k), (low, high) in zip(pairs, results):
            if s_point != s:
                continue
            drift = abs(high.ratio / low.ratio - 1.0) if low.ratio > 0 else float('inf')
            ratios.append(low.ratio)
            fine_ratios.append(high.ratio)
            drifts.append(drift)
            rows.append([s, k, low.lhs, low.rhs, low.ratio, high.rhs, high.ratio, drift])
        # empirical constant of the inequality at each surface mesh
        constants = [max(ratios), max(fine_ratios)]
        stable = all(np.isfinite(constants)) and spread(constants) <= spread_limit
        checks.append(check(f"extension constant {s_label(s)}", stable, spread(constants), spread_limit,
                            detail=f"C = {constants[0]:.4g} coarse, {constants[1]:.4g} fine; "
                                   f"spread across traces {spread(ratios):.4g}"))
        checks.append(check(f"extension mesh drift {s_label(s)}", max(drifts) <= drift_limit,
                            max(drifts), drift_limit))
        print(f"  s={s:g}: C = {constants[0]:.4g} -> {constants[1]:.4g}, max drift {max(drifts):.4g}")

    path = save_table(rows, ['s', 'trace', 'lhs', 'rhs', 'ratio', 'rhs_fine', 'ratio_fine', 'drift'],
                      output_path(run, 'extension'), run.format)
    print(f"✓ Extension study saved to {path}")
    return checks, {'traces': len(traces), 'seed': run.seed, 'n': run.n}


COMMANDS: Dict[str, Callable[[RunConfig, Dict[str, Any]], CommandResult]] = {
    'dsconst': cmd_dsconst,
    'layer': cmd_layer,
    'energy-scan': cmd_energy_scan,
    'monotonicity': cmd_monotonicity,
    'pohozaev': cmd_pohozaev,
    'psi-scan': cmd_psi_scan,
    'compare': cmd_compare,
    'extension': cmd_extension
}


def build_parser() -> argparse.ArgumentParser:
    """Command-line parser with one subcommand per experiment"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--s', help="fractional orders, e.g. 0.25,0.5")
    common.add_argument('--R', help="radii, strictly increasing, e.g. 8,16,32")
    common.add_argument('--eps', help="epsilon values in (0, 1/2), e.g. 1/8,1/16")
    common.add_argument('--nl', choices=NONLINEARITIES, help="nonlinearity")
    common.add_argument('--n', type=int, choices=(1, 2), help="base dimension")
    common.add_argument('--nx', type=int, help="cells per base direction")
    common.add_argument('--nlambda', type=int, help="cells in the extension variable")
    common.add_argument('--q', type=float, help="grading exponent of the lambda nodes")
    common.add_argument('--lambda', dest='Lambda', type=float, help="cylinder height")
    common.add_argument('--out', help="output directory")
    common.add_argument('--format', choices=FORMATS, help="table format")
    common.add_argument('--seed', type=int, help="seed for random traces")
    common.add_argument('--threads', type=int, help="parallel scan points")
    common.add_argument('--count', type=int, help="number of random traces")
    common.add_argument('--constant', type=float, help="check a constant field instead of a layer")
    common.add_argument('--strict', action='store_true', help="treat clipping and solver fallbacks as failures")
    common.add_argument('--config', help="JSON settings file")

    parser = argparse.ArgumentParser(prog='csx', description="Fractional layer lab")
    subparsers = parser.add_subparsers(dest='command', required=True)
    for name, command in COMMANDS.items():
        subparsers.add_parser(name, parents=[common], help=command.__doc__)
    return parser


def write_error(error: CSXError, directory: str) -> Optional[str]:
    path = os.path.join(directory, 'error.json')
    return path if save_to_json(error.to_dict(), path) else None


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main application function; returns the process exit code"""
    args = build_parser().parse_args(argv)
    config = Settings(args.config) if args.config else settings
    setup_logging(config)
    output_dir = args.out or config.get_output_config().get('dir', 'output')

    print(f"csx {args.command}")
    print("=" * 40)
    try:
        run = build_run_config(args, config)
        output_dir = run.output
        os.makedirs(output_dir, exist_ok=True)
        services = initialize_services(run)
        checks, summary = COMMANDS[run.command](run, services)
    except CSXError as e:
        print(f"✗ {type(e).__name__}: {e}")
        write_error(e, output_dir)
        return e.exit_code
    except KeyboardInterrupt:
        print("\nOperation cancelled by user")
        return 1
    except Exception as e:
        logger.exception("%s failed with an unexpected error", args.command)
        error = UnexpectedError(e)
        print(f"✗ {error}")
        write_error(error, output_dir)
        return error.exit_code

    report = HTMLReporter(output_dir).generate_check_report(run.command, checks, summary)
    failed = [c for c in checks if not c['passed']]
    print()
    for c in checks:
        marker = "✓" if c['passed'] else "✗"
        value = f" ({c['value']:.4g})" if isinstance(c.get('value'), float) else ""
        print(f"{marker} {c['name']}{value}")
    print(f"\nReport written to {report}")

    if failed:
        error = InvariantViolation(f"{len(failed)} of {len(checks)} checks failed: "
                                   + ", ".join(c['name'] for c in failed))
        write_error(error, output_dir)
        return error.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
