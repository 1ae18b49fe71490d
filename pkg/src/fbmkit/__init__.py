"""fbmkit: fractional Brownian motion prediction, inversion, and bound toolkit."""

from .context import HurstContext, make_context, pow0, xi
from .errors import AccuracyError, FbmkitError, ValidationError
from .grids import GridPath
from .quadrature import QuadratureSpec

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "FbmkitError",
    "GridPath",
    "HurstContext",
    "QuadratureSpec",
    "ValidationError",
    "make_context",
    "pow0",
    "xi",
    "__version__",
]
