"""Shared exception types."""


class ParameterError(ValueError):
    """A parameter is outside its documented domain."""


class DegenerateWeightsError(ValueError):
    """A weight configuration makes the requested quantity undefined."""


class SchemaError(ValueError):
    """A file does not match the expected schema."""
