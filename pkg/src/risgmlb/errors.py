class ShapeError(ValueError):
    """Operand dimensions do not conform."""


class NumericError(ArithmeticError):
    """A computation produced a non-finite value or failed to converge.

    ``index`` carries the coordinate or epoch at which the failure was seen,
    when there is one.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ConfigError(ValueError):
    """Invalid run configuration, raised before any work is started."""
