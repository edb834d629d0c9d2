"""choquard-lab: a numerical laboratory for normalized ground states and
orbital stability of a Schrodinger equation with two nonlocal
(pair-interaction) nonlinearities and an external potential."""

__version__ = "0.1.0"

from .grids import Field, Grid, ModelParams, gaussian
from .errors import (BlowUpError, ConvergenceError, FieldFormatError,
                     GridMismatchError, ParameterError, ResolutionWarning)

__all__ = [
    "Field", "Grid", "ModelParams", "gaussian",
    "BlowUpError", "ConvergenceError", "FieldFormatError",
    "GridMismatchError", "ParameterError", "ResolutionWarning",
    "__version__",
]
