"""Exception hierarchy.

Every domain failure raised by the library derives from
:class:`PowerMatrixError`; the class name is what the command line reports.
"""


class PowerMatrixError(ValueError):
    """Base class for domain errors."""


class LeadingCoefficientZero(PowerMatrixError):
    pass


class WindowMismatch(PowerMatrixError):
    pass


class CenterMismatch(PowerMatrixError):
    pass


class OrientationMismatch(PowerMatrixError):
    pass


class ZeroSeries(PowerMatrixError):
    pass


class NotComposable(PowerMatrixError):
    pass


class BadGeneratorIndex(PowerMatrixError):
    pass


class NotUnipotent(PowerMatrixError):
    pass


class SingularLeading(PowerMatrixError):
    pass


class NonPositiveTolerance(PowerMatrixError):
    pass


class NonPositiveSteps(PowerMatrixError):
    pass


class MalformedInput(ValueError):
    """Input that does not parse as one of the JSON interchange formats."""
