"""Exception hierarchy shared by all modules."""


class RigidBoundError(Exception):
    """Base class for every error raised by this package."""


class DegenerateGeometry(RigidBoundError):
    """A distance or projection needed by a dissimilarity is (numerically) zero."""

    def __init__(self, message, edge=None):
        super().__init__(message if edge is None else f"edge {edge}: {message}")
        self.edge = edge


class ArgOutOfRange(DegenerateGeometry):
    """An arccos argument left [-1, 1] by more than the rounding slack."""


class AngleSingularity(DegenerateGeometry):
    """The arccos derivative 1/sqrt(1 - x^2) is unbounded at this geometry."""


class InvalidParameter(RigidBoundError, ValueError):
    pass


class UnresolvedIntensity(RigidBoundError):
    pass


class OutOfSupport(RigidBoundError, ValueError):
    pass


class SingularFIM(RigidBoundError, ArithmeticError):
    """Raised when a Fisher matrix cannot be inverted.

    ``null_space`` holds an orthonormal basis (columns) of the unobservable
    directions.
    """

    def __init__(self, message, null_space=None):
        super().__init__(message)
        self.null_space = null_space


class ZeroTrace(RigidBoundError, ArithmeticError):
    pass


class SingularProjectedFIM(SingularFIM):
    pass


class NotRotation(RigidBoundError, ValueError):
    pass


class RankDeficient(RigidBoundError, ArithmeticError):
    pass


class DegenerateConformation(RankDeficient):
    pass


class ConfigError(RigidBoundError):
    pass


class ParseError(ConfigError):
    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class ValidationError(ConfigError, ValueError):
    def __init__(self, field, message=None):
        super().__init__(f"{field}: {message}" if message else field)
        self.field = field
