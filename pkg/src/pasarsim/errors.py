"""Exception classes shared across the package."""


class DomainError(ValueError):
    """An argument is outside the documented domain of an operation."""


class FormatError(ValueError):
    """A file or byte stream does not match the expected format."""


class ConfigError(ValueError):
    """A configuration is internally inconsistent or unusable."""


class StateError(RuntimeError):
    """An object was driven into a state the protocol forbids."""
