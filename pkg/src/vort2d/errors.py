"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Inputs violate an operation's preconditions (shape, grid, mean, range)."""


class ResolutionError(InvalidInputError):
    """The physical grid is too coarse to represent the requested modes."""


class ConfigError(ValueError):
    """A configuration file or value is malformed.

    Carries the offending key and 1-based line number when known.
    """

    def __init__(self, message, key=None, line=None):
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if key is not None:
            prefix += f"key '{key}': "
        super().__init__(prefix + message)
        self.key = key
        self.line = line


class NumericalFailureError(RuntimeError):
    """A time step produced non-finite values.

    Carries the failing step index and the path of the last good
    checkpoint, if one was written.
    """

    def __init__(self, message, step, checkpoint_path=None):
        super().__init__(message)
        self.step = step
        self.checkpoint_path = checkpoint_path


class BoundCheckError(RuntimeError):
    """A hard mathematical bound was violated at runtime."""
