"""Successive minima and approximation exponents for Roy's extremal numbers."""

from .errors import LabError
from .precision import ZetaContext

__all__ = ["LabError", "ZetaContext"]
__version__ = "0.1.0"
