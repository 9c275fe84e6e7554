"""
Configuration Loader

Builds the RunConfig of one CLI command from the settings layers and the
parsed command-line flags. Flags win over every settings layer.
"""

from argparse import Namespace
from typing import Any, Optional

from config.settings import Settings
from core.errors import ConfigError
from models.run_config import RunConfig
from utils.helpers import parse_float_list


def get_config_value(config: Settings, key: str, section: str, flag: Any = None) -> Any:
    """
    Resolve one configuration value

    Args:
        config: loaded settings
        key: key inside the section (e.g. 'threads')
        section: settings section (e.g. 'scan')
        flag: command-line value, returned when given

    Returns:
        The first value found among flag and settings, else None
    """
    if flag is not None:
        return flag
    return config.config.get(section, {}).get(key)


def _floats(text: Optional[str], what: str):
    if text is None:
        return None
    try:
        return parse_float_list(text)
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"could not parse {what} list '{text}': {e}") from e


def build_run_config(args: Namespace, config: Settings) -> RunConfig:
    """
    Merge settings and flags into a validated RunConfig

    Raises:
        ConfigError: when the settings or the merged configuration are invalid
    """
    problems = config.validate()
    if problems:
        raise ConfigError("; ".join(problems))

    scan = config.get_scan_config()

    run = RunConfig(command=args.command, s_list=_floats(getattr(args, 's', None), 's') or [0.5])
    run.nonlinearity = getattr(args, 'nl', None) or run.nonlinearity
    run.n = int(get_config_value(config, 'n', 'grid', flag=getattr(args, 'n', None)) or 1)
    run.R_list = _floats(getattr(args, 'R', None), 'R') or run.R_list
    run.eps_list = _floats(getattr(args, 'eps', None), 'epsilon') or run.eps_list
    run.nx = int(get_config_value(config, 'nx', 'grid', flag=getattr(args, 'nx', None)))
    run.nlambda = int(get_config_value(config, 'nlambda', 'grid', flag=getattr(args, 'nlambda', None)))

    q = get_config_value(config, 'q', 'grid', flag=getattr(args, 'q', None))
    run.q = None if q is None else float(q)
    Lambda = get_config_value(config, 'lambda', 'grid', flag=getattr(args, 'Lambda', None))
    run.Lambda = None if Lambda is None else float(Lambda)

    run.output = get_config_value(config, 'dir', 'output', flag=getattr(args, 'out', None))
    run.format = get_config_value(config, 'format', 'output', flag=getattr(args, 'format', None))
    run.seed = int(get_config_value(config, 'seed', 'scan', flag=getattr(args, 'seed', None)))
    run.threads = int(get_config_value(config, 'threads', 'scan', flag=getattr(args, 'threads', None)))
    run.solve_factor = float(scan.get('solve_factor', run.solve_factor))
    run.cells_per_unit = int(scan.get('cells_per_unit', run.cells_per_unit))
    run.cells_per_eps = int(scan.get('cells_per_eps', run.cells_per_eps))
    run.traces = int(get_config_value(config, 'traces', 'scan', flag=getattr(args, 'count', None)))
    run.strict = bool(getattr(args, 'strict', False))
    run.constant = getattr(args, 'constant', None)
    run.tolerances = dict(config.get_tolerances())
    run.solver = dict(config.get_solver_config())
    return run.check()
