"""
Exception hierarchy for poisson_tests.

The CLI maps DomainError and ConfigError to exit code 2 and NumericError to 3.
"""


class PoissonTestsError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(PoissonTestsError, ValueError):
    """An argument lies outside the domain of the operation (θ, t, u, ε, n, M)."""


class NumericError(PoissonTestsError, ArithmeticError):
    """A numerical procedure failed: quadrature, Fisher information or underflow."""


class ConfigError(PoissonTestsError, ValueError):
    """Unknown registry key, malformed table file or invalid run configuration."""
