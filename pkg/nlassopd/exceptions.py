class NLassoError(Exception):
    """base class of all errors raised by the package"""


class InvalidArgumentError(NLassoError, ValueError):
    """an argument has the wrong shape, id or value"""


class DomainError(NLassoError):
    """an input lies outside the domain of an operation, e.g., a disconnected graph"""


class ConfigurationError(NLassoError):
    """a configuration value is invalid or makes the method diverge"""


class InputFormatError(NLassoError):
    """an input file or configuration document is malformed"""


class NumericalError(NLassoError):
    """a numerical failure happened mid-run

    Attributes:  # noqa
        iteration: (int) iteration index at which the failure was detected
    """
    def __init__(self, message: str, iteration: int):
        super().__init__(message)
        self.iteration: int = iteration
