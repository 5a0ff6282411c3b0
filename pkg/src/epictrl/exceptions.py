"""Exception hierarchy shared by the library and the CLI."""


class EpictrlError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(EpictrlError, ValueError):
    """A numeric input is non-finite, out of range, or badly shaped."""


class ShapeError(InvalidInputError):
    """Arrays that must share a grid do not."""


class ConfigurationError(InvalidInputError):
    """A scenario document is missing keys or carries invalid values.

    ``path`` is the dotted field path of the offending entry (for example
    ``"params.tau_h_d"``) when one is known.
    """

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class DivergenceError(EpictrlError, ArithmeticError):
    """Integration produced a non-finite value."""

    def __init__(self, message, step=None):
        self.step = step
        super().__init__(message)
