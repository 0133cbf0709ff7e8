"""Exact cosheaf homology and spectral sequences over the rationals."""
from ._backend import NAME as backend

__version__ = "0.1.0"

__all__ = ["backend", "__version__"]
