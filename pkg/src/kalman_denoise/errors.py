"""Exception hierarchy shared by every module."""


class KalmanDenoiseError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(KalmanDenoiseError, ValueError):
    """An array has the wrong size or dimensionality."""


class InsufficientDataError(KalmanDenoiseError, ValueError):
    """Too few frames for the requested operation."""


class DegenerateInputError(KalmanDenoiseError, ValueError):
    """Input carries no usable signal (e.g. a zero-power residual)."""


class FormatError(KalmanDenoiseError, ValueError):
    """A file could not be decoded."""


class MalformedHeaderError(FormatError):
    pass


class MixedDimensionsError(FormatError):
    pass


class EmptySequenceError(FormatError):
    pass


class NumericError(KalmanDenoiseError, ArithmeticError):
    """NaN or infinity appeared where finite values are required."""
