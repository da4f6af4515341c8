"""Exception hierarchy.

Everything raised on purpose derives from :class:`MitscherlichError`, so
callers (the CLI in particular) can separate user-facing failures from bugs.
"""


class MitscherlichError(Exception):
    """Base class for all package errors."""


class DomainError(MitscherlichError, ValueError):
    """A mean or stimulus lies outside the admissible domain of a family."""


class RangeError(MitscherlichError, ArithmeticError):
    """Numeric overflow while evaluating the mean function."""


class OrderError(MitscherlichError, ValueError):
    """Stimuli are not strictly increasing."""


class PrecisionError(MitscherlichError, ArithmeticError):
    """A formula degenerates (zero denominator) for the given inputs."""


class InfeasibleError(MitscherlichError, ValueError):
    """No valid design exists for the requested family, parameters and window."""


class ConvergenceError(MitscherlichError, RuntimeError):
    """Root finding could not bracket or converge."""


class UnsupportedError(MitscherlichError, RuntimeError):
    """The placement theorems do not apply and grid fallback was disabled."""


class BudgetError(MitscherlichError, RuntimeError):
    """A brute-force grid would exceed the configured cell cap."""


class ConfigError(MitscherlichError, ValueError):
    """Invalid simulation or run configuration."""


class NonConvergence(MitscherlichError, RuntimeError):
    """Fisher scoring did not converge within the iteration limit."""


class SingularInformation(MitscherlichError, ArithmeticError):
    """The scoring matrix is numerically singular."""
