"""Exception and warning types shared across the package."""

from __future__ import annotations


class ConfspecError(Exception):
    """Base class for every error raised by this package."""


class InputError(ConfspecError):
    """Bad user-supplied input: arguments, files, configuration (exit code 2)."""


class NumericalError(ConfspecError):
    """Numerically infeasible operation: singular or degenerate input (exit code 3)."""


class InvalidInput(InputError):
    """Argument violates an operation's precondition."""


class ParseError(InputError):
    """Malformed cell in a delimited input file."""

    def __init__(self, row: int, col: int, message: str):
        self.row = row
        self.col = col
        super().__init__(f"row {row}, column {col}: {message}")


class ConstantColumn(InputError):
    """A predictor column has zero sample variance."""


class IoError(InputError):
    """File could not be read or written; message carries the path."""


class SingularCovariance(NumericalError):
    """Covariance matrix is singular or too ill-conditioned to invert."""


class SingularSupport(NumericalError):
    """Operation needs all support points nonzero but the measure has a zero atom."""


class ZeroRegressionVector(NumericalError):
    """Regression vector vanishes; there is no dependence to analyze."""


class OutOfDomain(NumericalError):
    """Closed-form conversion evaluated outside its domain (negative discriminant)."""


class ConfspecWarning(UserWarning):
    """Base class for warnings attached to results."""


class NormalizationWarning(ConfspecWarning):
    """Predictors were rescaled to unit variance; interpret estimates with care."""


class DegenerateSpectrumWarning(ConfspecWarning):
    """All covariance eigenvalues coincide; the spectrum carries no signal."""


class ClampedValueWarning(ConfspecWarning):
    """A converted strength fell outside [0, 1] and was clamped."""
