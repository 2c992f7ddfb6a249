"""Exception hierarchy shared by all modules."""


class StochSpreadError(Exception):
    """Base class for every error raised by this package."""


class InputError(StochSpreadError, ValueError):
    """Bad user-supplied data or arguments."""


class EmptyInputError(InputError):
    pass


class DateParseError(InputError):
    pass


class DomainError(InputError):
    """A value lies outside the domain an operation accepts."""


class BoundaryGapError(InputError):
    """A series starts or ends with a gap; interpolation never extrapolates."""


class ConfigError(InputError):
    pass


class NumericalError(StochSpreadError, ArithmeticError):
    pass


class DegenerateInputError(NumericalError):
    """Regressors are singular (e.g. a constant series)."""


class DegenerateVectorError(NumericalError):
    """The dominant cointegration vector cannot be normalised on its first entry."""


class ContractError(StochSpreadError, ValueError):
    """A parameter mapping produced a value violating the model constraints."""


class EstimationFailedError(StochSpreadError):
    pass


class NoTradeError(StochSpreadError):
    """No candidate threshold produced a single trade."""
