"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument is outside its admissible range."""


class ConfigError(ParameterError):
    """A model configuration is malformed or internally inconsistent."""


class DataError(ValueError):
    """Input data cannot be used (e.g. empty after filtering)."""


class UnsupportedOperationError(TypeError):
    """The operation does not apply to this kind of run."""


class DegenerateFitError(RuntimeError):
    """A mixture fit collapsed and could not be recovered."""
