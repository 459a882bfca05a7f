"""Exception hierarchy shared across the package."""


class HpdKernError(Exception):
    """Base class for all domain errors raised by this package."""


class NotHermitian(HpdKernError):
    pass


class NotPositiveDefinite(HpdKernError):
    pass


class DimensionMismatch(HpdKernError):
    pass


class SingularMatrix(HpdKernError):
    pass


class NumericalInstability(HpdKernError):
    """A confluent-limit estimate did not converge to the requested accuracy."""


class PoleError(HpdKernError):
    """Evaluation at (or too close to) a pole of the Gamma function."""


class StepTooLarge(HpdKernError):
    """Finite-difference step failed its Richardson error check."""


class NonRealResult(HpdKernError):
    """An integral that must be real came back with a large imaginary part."""


class CalibrationInconsistent(HpdKernError):
    """The quadrature/closed-form ratio is not constant across test points."""


class AlphaOutOfRange(HpdKernError):
    pass


class SizeMismatch(HpdKernError):
    pass


class OddSampleSize(HpdKernError):
    pass


class EmptyGrid(HpdKernError):
    pass


class CoefficientPole(HpdKernError):
    pass


class TruncationWarning(UserWarning):
    """Integrand mass outside the quadrature box is not negligible."""
