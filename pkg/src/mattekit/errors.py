"""Exception types shared across the toolkit."""


class MatteKitError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(MatteKitError, ValueError):
    """Input data violates a value-range or shape contract."""


class ParameterError(MatteKitError, ValueError):
    """A configuration parameter is out of its allowed domain."""
