"""
Run Configuration

Merged view of settings and command-line flags used by one CLI command.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

from core.errors import ConfigError

FORMATS = ('csv', 'json')
NONLINEARITIES = ('allen_cahn', 'sine_halfs')


@dataclass
class RunConfig:
    """Parameters of one command run"""

    command: str
    s_list: List[float]
    nonlinearity: str = 'allen_cahn'
    n: int = 1
    R_list: List[float] = field(default_factory=lambda: [8.0, 16.0, 32.0])
    nx: int = 256
    nlambda: int = 128
    q: Optional[float] = None
    Lambda: Optional[float] = None
    eps_list: List[float] = field(default_factory=lambda: [1 / 8, 1 / 16, 1 / 32, 1 / 64])
    tolerances: Dict[str, float] = field(default_factory=dict)
    solver: Dict[str, float] = field(default_factory=dict)
    output: str = 'output'
    format: str = 'csv'
    seed: int = 12345
    strict: bool = False
    threads: int = 4
    solve_factor: float = 2.0
    cells_per_unit: int = 8
    cells_per_eps: int = 4
    traces: int = 20
    constant: Optional[float] = None

    def validate(self) -> List[str]:
        """Return a list of configuration problems (empty when valid)"""
        problems = []
        if not self.s_list:
            problems.append("at least one s value is required")
        for s in self.s_list:
            if not 0.0 < s < 1.0:
                problems.append(f"s = {s} is outside (0, 1)")
        if self.n not in (1, 2):
            problems.append(f"n must be 1 or 2, got {self.n}")
        if any(r <= 0 for r in self.R_list):
            problems.append("radii must be positive")
        if any(b <= a for a, b in zip(self.R_list, self.R_list[1:])):
            problems.append("radii must be strictly increasing")
        if self.nx < 4 or self.nlambda < 4:
            problems.append("nx and nlambda must be at least 4")
        if self.q is not None and self.q < 1.0:
            problems.append(f"grading exponent q must be >= 1, got {self.q}")
        if self.Lambda is not None and self.Lambda <= 0:
            problems.append("cylinder height must be positive")
        if any(not 0.0 < e < 0.5 for e in self.eps_list):
            problems.append("epsilon values must lie in (0, 1/2)")
        if self.format not in FORMATS:
            problems.append(f"format must be one of {', '.join(FORMATS)}")
        if self.nonlinearity not in NONLINEARITIES:
            problems.append(f"unknown nonlinearity '{self.nonlinearity}'")
        if self.threads < 1:
            problems.append("thread count must be positive")
        if self.cells_per_unit < 1 or self.cells_per_eps < 0:
            problems.append("surface mesh needs cells_per_unit >= 1 and cells_per_eps >= 0")
        return problems

    def check(self) -> "RunConfig":
        problems = self.validate()
        if problems:
            raise ConfigError("; ".join(problems))
        return self

    def tolerance(self, name: str, default: float) -> float:
        return float(self.tolerances.get(name, default))
