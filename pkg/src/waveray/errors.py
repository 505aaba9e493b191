"""Exception types raised by waveray."""


class WaveRayError(Exception):
    """Base class for all waveray errors."""


class InvalidGridError(WaveRayError, ValueError):
    pass


class DimensionError(WaveRayError, ValueError):
    pass


class SingularMatrixError(WaveRayError, ArithmeticError):
    pass


class RelaxationBreakdown(WaveRayError, ArithmeticError):
    """A zero diagonal entry or zero row was hit during relaxation."""


class DegenerateBasisError(WaveRayError, ValueError):
    """A basis function vanishes (or nearly so) at some grid node."""


class ConfigurationError(WaveRayError, ValueError):
    """Scale windows or solver parameters cannot be satisfied."""


class AlignmentError(ConfigurationError):
    """The media interface does not sit on a node of the required grid."""
