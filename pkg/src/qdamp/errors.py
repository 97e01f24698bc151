"""Exception hierarchy.

Numerical failures derive from :class:`NumericalError`; the CLI maps those to
exit code 1. Precondition violations derive from :class:`ValueError` as well
so callers can treat them as ordinary bad input.
"""


class QdampError(Exception):
    """Base class for every error raised by the package."""


class NumericalError(QdampError):
    """A computation ran but did not meet its accuracy or stability target."""


class QuadratureNonConvergence(NumericalError):
    pass


class ExponentialNonConvergence(NumericalError):
    pass


class StepTooLarge(NumericalError):
    pass


class PerturbationBreakdown(NumericalError):
    pass


class NonPositiveFrequency(QdampError, ValueError):
    pass


class AboveCutoff(QdampError, ValueError):
    pass


class TabulatedOutOfRange(QdampError, ValueError):
    pass


class OverdampedRegime(QdampError, ValueError):
    pass


class GridMismatch(QdampError, ValueError):
    pass


class NonHarmonicPotential(QdampError, ValueError):
    pass


class NonPositiveTemperature(QdampError, ValueError):
    pass


class OutOfRange(QdampError, ValueError):
    pass
