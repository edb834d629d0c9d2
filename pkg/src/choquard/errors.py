"""Exception and warning types shared across the package."""


class ParameterError(ValueError):
    """A parameter lies outside its admissible window."""


class GridMismatchError(ValueError):
    """Two fields (or a field and a potential) live on different grids."""


class FieldFormatError(ValueError):
    """A field file is malformed (magic, version, or truncation)."""


class ConvergenceError(RuntimeError):
    """An iterative solve did not converge; carries the last iterate."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class BlowUpError(RuntimeError):
    """Evolution produced NaN/overflow; carries the last finite state."""

    def __init__(self, message, time=None, last_state=None):
        super().__init__(message)
        self.time = time
        self.last_state = last_state


class ResolutionWarning(UserWarning):
    """A spectral operation detected significant unresolved tail energy."""
