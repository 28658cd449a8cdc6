"""Exception taxonomy shared across the library."""


class ShapeError(ValueError):
    """Array shape does not match what an operation requires."""


class DtypeError(TypeError):
    """Array dtype is incompatible with an operation."""


class ValidationError(ValueError):
    """A parameter is outside its documented range or structure."""


class DomainError(ValueError):
    """A value violates a mathematical domain constraint (e.g. negativity)."""


class FormatError(ValueError):
    """A file payload or header is malformed; the message names the field."""


class CapabilityError(TypeError):
    """The requested operation is undefined for this variant."""


class DivergenceError(RuntimeError):
    """An iterative procedure produced NaN/Inf."""


class ConfigError(ValueError):
    """An experiment configuration is invalid; the message carries the field path."""
