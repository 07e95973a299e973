"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input is outside the mathematical domain of an operation."""


class ConfigurationError(ValueError):
    """A run configuration is inconsistent (grid too coarse, trace too short, ...)."""
