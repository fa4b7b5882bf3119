"""Exception hierarchy.

Validation problems (bad input, bad configuration) derive from
``ValidationError``; failures of a numerical procedure on valid input derive
from ``NumericalError``. The CLI maps the two families to exit codes 2 and 3.
"""


class RankPCAError(Exception):
    pass


class ValidationError(RankPCAError, ValueError):
    pass


class DomainError(ValidationError):
    """An argument lies outside the domain of the operation."""


class DimensionError(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class NumericalError(RankPCAError, ArithmeticError):
    pass


class ConvergenceError(NumericalError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DegenerateDataError(NumericalError):
    """Data (or a derived quantity) is degenerate for the requested procedure."""


class DegenerateSpectrumError(NumericalError):
    pass


class InfiniteMomentError(NumericalError):
    pass


class InfeasibleNullError(NumericalError):
    """The constrained null estimate left the parameter space."""


class InternalConsistencyError(NumericalError):
    pass
