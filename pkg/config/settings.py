"""
Configuration Settings

Load and manage configuration from config.json and environment variables.
"""

import copy
import json
import logging
import os
from typing import Any, Dict, List

logger = logging.getLogger(__name__)

DEFAULTS: Dict[str, Any] = {
    'solver': {
        'linear_tol': 1e-10,
        'newton_tol': 1e-8,
        'max_newton': 200,
        'armijo': 1e-4,
        'max_backtracks': 30,
        'stall_tol': 1e-6
    },
    'grid': {
        'nx': 256,
        'nlambda': 128,
        'q': None,
        'lambda': None
    },
    'scan': {
        'threads': 4,
        'solve_factor': 2.0,
        'seed': 12345,
        'cells_per_unit': 8,
        'cells_per_eps': 4,
        'traces': 20
    },
    'tolerances': {
        'monotonicity': 1e-3,
        'pohozaev': 0.05,
        'layer_linf': 2e-2,
        'psi_spread': 3.0,
        'ratio_spread': 3.0,
        'extension_spread': 2.0,
        'extension_drift': 0.3,
        'sliding': 1e-3,
        'sliding_final': 0.2
    },
    'output': {
        'dir': 'output',
        'format': 'csv'
    },
    'logging': {
        'level': 'INFO',
        'file': None
    }
}


def _merge(base: Dict[str, Any], update: Dict[str, Any]) -> Dict[str, Any]:
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _merge(base[key], value)
        else:
            base[key] = value
    return base


class Settings:
    """Configuration settings manager"""

    def __init__(self, config_file: str = None):
        """
        Initialize settings

        Args:
            config_file: Path to configuration file (CSX_CONFIG or config/config.json by default)
        """
        self.config_file = config_file or os.getenv('CSX_CONFIG', 'config/config.json')
        self.config = self._load_config()

    def _load_config(self) -> Dict[str, Any]:
        """Load configuration from defaults, file and environment variables"""
        config = copy.deepcopy(DEFAULTS)

        if os.path.exists(self.config_file):
            try:
                with open(self.config_file, 'r', encoding='utf-8') as f:
                    _merge(config, json.load(f))
            except (json.JSONDecodeError, IOError) as e:
                logger.warning("could not load %s: %s", self.config_file, e)

        return self._override_with_env(config)

    def _override_with_env(self, config: Dict[str, Any]) -> Dict[str, Any]:
        """Override configuration with environment variables"""
        if os.getenv('CSX_THREADS'):
            try:
                config['scan']['threads'] = int(os.getenv('CSX_THREADS'))
            except ValueError:
                logger.warning("ignoring non-integer CSX_THREADS=%s", os.getenv('CSX_THREADS'))
        if os.getenv('CSX_SEED'):
            try:
                config['scan']['seed'] = int(os.getenv('CSX_SEED'))
            except ValueError:
                logger.warning("ignoring non-integer CSX_SEED=%s", os.getenv('CSX_SEED'))
        if os.getenv('CSX_LOG_LEVEL'):
            config['logging']['level'] = os.getenv('CSX_LOG_LEVEL').upper()
        if os.getenv('CSX_OUTPUT'):
            config['output']['dir'] = os.getenv('CSX_OUTPUT')
        return config

    def get_solver_config(self) -> Dict[str, Any]:
        return self.config.get('solver', {})

    def get_grid_config(self) -> Dict[str, Any]:
        return self.config.get('grid', {})

    def get_scan_config(self) -> Dict[str, Any]:
        return self.config.get('scan', {})

    def get_tolerances(self) -> Dict[str, float]:
        return self.config.get('tolerances', {})

    def get_output_config(self) -> Dict[str, Any]:
        return self.config.get('output', {})

    def get_logging_config(self) -> Dict[str, Any]:
        return self.config.get('logging', {})

    def validate(self) -> List[str]:
        """Human-readable configuration problems (empty when valid)"""
        problems = []
        solver = self.get_solver_config()
        for key in ('linear_tol', 'newton_tol', 'armijo', 'stall_tol'):
            if not isinstance(solver.get(key), (int, float)) or solver.get(key) <= 0:
                problems.append(f"solver.{key} must be a positive number")
        for key in ('max_newton', 'max_backtracks'):
            if not isinstance(solver.get(key), int) or solver.get(key) < 1:
                problems.append(f"solver.{key} must be a positive integer")
        grid = self.get_grid_config()
        for key in ('nx', 'nlambda'):
            if not isinstance(grid.get(key), int) or grid.get(key) < 4:
                problems.append(f"grid.{key} must be an integer >= 4")
        scan = self.get_scan_config()
        if not isinstance(scan.get('threads'), int) or scan.get('threads') < 1:
            problems.append("scan.threads must be a positive integer")
        if self.get_output_config().get('format') not in ('csv', 'json'):
            problems.append("output.format must be csv or json")
        level = str(self.get_logging_config().get('level', 'INFO')).upper()
        if level not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
            problems.append(f"unknown logging level '{level}'")
        return problems



# Global settings instance
settings = Settings()
