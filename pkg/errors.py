"""
Exception hierarchy for the secrecy outage toolkit.

Every error carries the process exit code the CLI reports for it:
0 success, 2 configuration problems, 3 solver non-convergence,
4 infeasible outage/rate/buffer requests, 1 anything unexpected.
"""

from typing import Dict, Optional


class SecrecyOutageError(Exception):
    """Base class for all toolkit errors."""
    exit_code = 1


class ConfigError(SecrecyOutageError, ValueError):
    """Invalid run configuration or constructor argument."""
    exit_code = 2

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvalidConfig(ConfigError):
    """Queue configuration that cannot realize the requested outage level."""


class NonIntegrable(SecrecyOutageError, ArithmeticError):
    """Integrand evaluated to a non-finite value on the support."""


class DegenerateGain(SecrecyOutageError, ArithmeticError):
    """Channel inversion requested on a zero main-channel gain."""


class InfeasibleOutage(SecrecyOutageError):
    """The outage level leaves no main-channel mass to invert on."""
    exit_code = 4


class InfeasibleRate(SecrecyOutageError):
    """Target rate exceeds the largest rate the power budget can invert."""
    exit_code = 4


class DomainError(SecrecyOutageError, ArithmeticError):
    """Closed-form bound evaluated outside its valid domain."""
    exit_code = 4


class Unreachable(SecrecyOutageError):
    """No buffer size on the search grid reaches the outage target."""
    exit_code = 4


class NoConvergence(SecrecyOutageError, RuntimeError):
    """Bracketed search hit its iteration cap."""
    exit_code = 3

    def __init__(self, message: str, diagnostics: Optional[Dict] = None):
        self.diagnostics = dict(diagnostics or {})
        super().__init__(message)
