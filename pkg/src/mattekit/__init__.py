"""Toolkit for matting data synthesis, supervision masks, merging, losses and metrics."""
from .errors import MatteKitError, ParameterError, ValidationError

__version__ = "0.1.0"

__all__ = ["MatteKitError", "ParameterError", "ValidationError", "__version__"]
