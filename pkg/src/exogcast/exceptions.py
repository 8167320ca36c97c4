"""Exception types raised across the package.

Every error derives from :class:`ExogcastError` so the CLI can map a failure
to an exit code with a single ``except`` clause. Most also subclass the
builtin they most resemble, which keeps them catchable by generic code.
"""


class ExogcastError(Exception):
    """Base class for all package errors."""


class ValidationError(ExogcastError, ValueError):
    """Invalid user-supplied configuration or arguments."""


class ConfigurationError(ValidationError):
    pass


class ParameterError(ValidationError):
    pass


class DataError(ExogcastError, ValueError):
    """Input data violates an expected invariant."""


class SchemaError(DataError):
    pass


class ModelError(ExogcastError):
    """A numerical model could not be fit or evaluated."""


class LengthError(ModelError, ValueError):
    pass


class DimensionError(ModelError, ValueError):
    pass


class DomainError(ModelError, ValueError):
    pass


class DegenerateSeriesError(ModelError, ValueError):
    pass


class CollinearityError(ModelError, ValueError):
    pass


class InputError(ModelError, ValueError):
    pass


class ScheduleError(ModelError, ValueError):
    pass


class AggregationError(ModelError, ValueError):
    pass


class ConvergenceError(ModelError, RuntimeError):
    """Iterative fit ran out of budget.

    ``best_params`` holds the best iterate seen, so callers can still use it.
    """

    def __init__(self, message, best_params=None):
        super().__init__(message)
        self.best_params = best_params
