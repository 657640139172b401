"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ValidationError (and subclasses) -> 2,
AccuracyError -> 3.
"""


class GaussQmcError(Exception):
    """Base class for all package errors."""


class ValidationError(GaussQmcError, ValueError):
    """Invalid argument, configuration, or plan."""


class UnsupportedDimensionError(ValidationError):
    """Dimension outside the range an exact algorithm or table supports."""


class BudgetExceededError(ValidationError):
    """A combinatorial enumeration would exceed its configured budget."""


class SingularPointError(GaussQmcError):
    """A plain (unprojected) estimator met an infinite transformed sample."""


class AccuracyError(GaussQmcError):
    """A numerical procedure failed to reach its required accuracy."""
