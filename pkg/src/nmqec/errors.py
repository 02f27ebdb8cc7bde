"""Exception hierarchy.

Every numerical failure derives from :class:`QECError`; the CLI maps those to
exit code 3 and configuration problems (:class:`ConfigError`) to exit code 2.
"""


class QECError(Exception):
    """Base class for numerical failures inside the library."""


class NotHermitian(QECError, ValueError):
    pass


class NegativeEigenvalue(QECError, ValueError):
    pass


class DimensionMismatch(QECError, ValueError):
    pass


class SizeCapExceeded(QECError, ValueError):
    pass


class SingularMap(QECError, ValueError):
    pass


class OutOfRange(QECError, ValueError):
    pass


class PoleAtGZero(QECError, ZeroDivisionError):
    """The decay rate diverges where G(t) vanishes."""


class NonCommutingGenerators(QECError, ValueError):
    pass


class DependentGenerators(QECError, ValueError):
    pass


class NotNormalized(QECError, ValueError):
    pass


class NegativeEP(QECError, ValueError):
    """The noise image of the code projector has a negative eigenvalue."""


class AmbiguousSyndrome(QECError, ValueError):
    pass


class UnsupportedCodeDimension(QECError, ValueError):
    pass


class GridTooCoarse(QECError, ValueError):
    pass


class NotCorrectable(QECError, ValueError):
    pass


class IllConditioned(QECError, ValueError):
    def __init__(self, message: str, condition_number: float):
        super().__init__(message)
        self.condition_number = condition_number


class ConfigError(Exception):
    """Scenario or command-line configuration could not be resolved."""
