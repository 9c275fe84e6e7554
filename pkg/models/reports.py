"""
Report Models

Structured outputs of the solvers and verification checks. Every report
converts to plain JSON-ready dictionaries through ``to_dict``.
"""

import json
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional

import numpy as np


def _plain(value: Any) -> Any:
    """Convert numpy scalars/arrays nested in report data to JSON types"""
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


class ReportMixin:
    """Shared serialization for dataclass reports"""

    def to_dict(self) -> Dict[str, Any]:
        return _plain(asdict(self))

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


@dataclass
class SolveReport(ReportMixin):
    """Outcome of a linear or nonlinear solve"""

    iterations: int
    final_energy: float
    energy_history: List[float]
    residual_norm: float
    converged: bool
    method: str = "newton"
    clip_count: int = 0
    fallback_steps: int = 0
    stalled: bool = False
    message: str = ""

    def is_monotone(self, slack: float = 1e-12) -> bool:
        """True when the energy history never increases by more than slack"""
        history = np.asarray(self.energy_history, dtype=float)
        if len(history) < 2:
            return True
        return bool(np.all(np.diff(history) <= slack * (1.0 + np.abs(history[:-1]))))


@dataclass(frozen=True)
class EnergyRegion:
    """Integration region: cylinder (-R,R)^n x (0,R) or half-ball of radius R"""

    kind: str
    radius: float
    center: float = 0.0

    @classmethod
    def cylinder(cls, radius: float, center: float = 0.0) -> "EnergyRegion":
        return cls('cylinder', float(radius), float(center))

    @classmethod
    def halfball(cls, radius: float) -> "EnergyRegion":
        return cls('halfball', float(radius))


@dataclass
class EnergyBreakdown(ReportMixin):
    """Dirichlet part, potential part and their sum over one region"""

    dirichlet: float
    potential: float
    region: EnergyRegion
    s: float
    c_shift: float = 0.0
    total: float = field(default=0.0)
    clip_count: int = 0

    def __post_init__(self):
        self.dirichlet = float(self.dirichlet)
        self.potential = float(self.potential)
        self.total = self.dirichlet + self.potential


@dataclass
class PohozaevReport(ReportMixin):
    """
    Terms of the Pohozaev identity on a half-ball

    LHS = lhs_bulk + lhs_potential, RHS = rhs_grad - rhs_normal + rhs_potential.
    """

    radius: float
    lhs_bulk: float
    lhs_potential: float
    rhs_grad: float
    rhs_normal: float
    rhs_potential: float
    relative_residual: float = 0.0

    def __post_init__(self):
        lhs, rhs = self.lhs, self.rhs
        eps = float(np.finfo(float).eps)
        self.relative_residual = abs(lhs - rhs) / (abs(lhs) + abs(rhs) + eps)

    @property
    def lhs(self) -> float:
        return self.lhs_bulk + self.lhs_potential

    @property
    def rhs(self) -> float:
        return self.rhs_grad - self.rhs_normal + self.rhs_potential


@dataclass
class GrowthFit(ReportMixin):
    """
    Log-log fit of energies against radii with the growth regime it matches

    ``leading`` and ``offset`` are the coefficients of the two-term model
    E = leading * law(R) + offset * correction(R); the tolerance check is made
    on ``acceptance_value`` (the fitted exponent, the critical flatness or the
    corrected spread, by regime).
    """

    radii: List[float]
    energies: List[float]
    slope: float
    regime: str
    regime_stat: float
    expected_regime: str
    n: int
    s: float
    leading: float = 0.0
    offset: float = 0.0
    corrected_exponent: float = float('nan')
    corrected_spread: float = float('inf')
    acceptance_value: float = float('nan')
    meets_tolerance: bool = False
    thresholds: Dict[str, float] = field(default_factory=lambda: {
        'slope_window': 0.15,
        'flatness': 0.20,
        'exponent_tolerance': 0.1,
        'bounded_spread': 1.1
    })

    @property
    def consistent(self) -> bool:
        return self.regime == self.expected_regime


@dataclass
class PsiReport(ReportMixin):
    """Terms of the boundary functional and its closed-form bound"""

    l2_term: float
    frac_term: float
    weig_term: float
    epsilon: float
    bound_integral: float
    s: float
    total: float = 0.0
    ratio: float = 0.0

    def __post_init__(self):
        self.total = self.l2_term + self.frac_term + self.weig_term
        self.ratio = self.total / self.bound_integral


@dataclass
class ExtensionCheck(ReportMixin):
    """Weighted Dirichlet energy of the extension against its boundary bound"""

    lhs: float
    rhs: float
    s: float
    cells_per_unit: int
    ratio: float = 0.0

    def __post_init__(self):
        self.ratio = self.lhs / self.rhs if self.rhs > 0 else float('inf')


@dataclass
class ComparisonReport(ReportMixin):
    """Energy comparison between a minimizer and its cut-off competitor"""

    R: float
    s: float
    tau: float
    c_u: float
    E_v: float
    E_wbar: float
    bound: float
    minimality_ok: bool
    potential_wbar: float
    potential_bound: float
    dirichlet_rescaled: float
    ratio: float = 0.0

    def __post_init__(self):
        self.ratio = self.E_wbar / self.bound if self.bound > 0 else float('inf')

    @property
    def potential_ok(self) -> bool:
        return self.potential_wbar <= self.potential_bound + 1e-12 * (1.0 + abs(self.potential_bound))


class GradientBounds(NamedTuple):
    """Empirical constants of the three gradient estimates"""

    grad_x: float
    lambda_grad: float
    flux: float


@dataclass
class LowerBoundCheck(ReportMixin):
    """Cylinder energies compared against phi(R0) R^(n-2s)"""

    R0: float
    phi_R0: float
    radii: List[float]
    ratios: List[float]
    passed: bool
    slack: float = 1e-3
    note: Optional[str] = None
