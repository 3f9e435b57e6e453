"""Exception types raised across the package."""

import numpy as np


class MvpldaError(Exception):
    """Base class for all errors raised by mvplda."""


class NotPositiveDefinite(MvpldaError, np.linalg.LinAlgError):
    pass


class SingularAccumulator(MvpldaError, np.linalg.LinAlgError):
    pass


class NonFiniteScore(MvpldaError, FloatingPointError):
    """A scorer produced NaN or an infinite score."""


class DimensionMismatch(MvpldaError, ValueError):
    pass


class EmptyDataset(MvpldaError, ValueError):
    pass


class InvalidPriors(MvpldaError, ValueError):
    pass


class DegenerateTrialSet(MvpldaError, ValueError):
    pass


class EmptyEnrollment(MvpldaError, ValueError):
    pass


class ZeroVector(MvpldaError, ValueError):
    pass


class FormatError(MvpldaError, ValueError):
    """Malformed input file. ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MalformedHeader(FormatError):
    pass


class RowArityError(FormatError):
    pass


class NonFiniteValue(FormatError):
    pass


class MissingSection(FormatError):
    pass


class DimMismatch(FormatError):
    pass
