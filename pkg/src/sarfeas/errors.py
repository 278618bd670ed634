"""Exception types shared across the package.

Each class maps onto one CLI exit code, so callers can catch broadly
(``SarfeasError``) or by failure kind.
"""


class SarfeasError(Exception):
    exit_code = 1


class ConfigError(SarfeasError):
    """Scenario configuration failed schema or semantic validation."""

    exit_code = 2


class DomainError(SarfeasError, ValueError):
    """An input lies outside the domain of the requested computation."""

    exit_code = 3


class ConvergenceError(SarfeasError, ArithmeticError):
    """An iterative numerical procedure failed to reach its tolerance."""

    exit_code = 4
