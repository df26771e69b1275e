"""Exception hierarchy.

Malformed inputs raise; points outside a density's support do not (they
evaluate to ``-inf``).
"""


class MatricvariateError(ValueError):
    """Base class for all errors raised by this package."""


class DimensionError(MatricvariateError):
    pass


class UnsupportedAlgebraError(MatricvariateError):
    pass


class NotPositiveDefiniteError(MatricvariateError):
    pass


class DegenerateInputError(MatricvariateError):
    pass


class DomainError(MatricvariateError):
    """Special-function argument at or below a pole."""


class ParameterError(MatricvariateError):
    pass


class SupportError(MatricvariateError):
    """Spectral input violates an ordering/support precondition."""


class DiagnosticsError(MatricvariateError):
    pass


class ConsistencyError(MatricvariateError):
    """Internal numerical consistency check failed."""


class ConfigError(MatricvariateError):
    pass
