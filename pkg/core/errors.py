"""
Error Types

Exception hierarchy shared by the numerical core, the services and the CLI.
Every error class carries the process exit code the CLI reports for it.
"""

from typing import Any, Dict, Optional


class CSXError(Exception):
    """Base class for all lab errors"""

    exit_code = 1

    def to_dict(self) -> Dict[str, Any]:
        """Machine-readable form written by the CLI as error.json"""
        return {
            'error': type(self).__name__,
            'message': str(self),
            'exit_code': self.exit_code
        }


class ConfigError(CSXError):
    """Invalid run configuration"""

    exit_code = 4


class DomainError(ConfigError, ValueError):
    """Argument outside the domain of an operation"""


class SolverError(CSXError, RuntimeError):
    """A solver stopped without meeting its convergence criterion"""

    exit_code = 2

    def __init__(self, message: str, report: Optional[Any] = None):
        super().__init__(message)
        self.report = report

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        if self.report is not None and hasattr(self.report, 'to_dict'):
            data['report'] = self.report.to_dict()
        return data


class InvariantViolation(CSXError):
    """A verification check failed"""

    exit_code = 3


class UnexpectedError(CSXError):
    """Any other exception escaping a command, wrapped for the error report"""

    def __init__(self, cause: BaseException):
        super().__init__(f"{type(cause).__name__}: {cause}")
        self.cause = cause

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data['cause'] = type(self.cause).__name__
        return data
