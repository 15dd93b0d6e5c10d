"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class CapacityError(ValueError):
    """A request exceeds a deliberate size/capacity limit."""


class NumericError(RuntimeError):
    """A numerical routine failed to reach its accuracy target."""


class UnsupportedConfigError(ValueError):
    """A structurally valid configuration that this version does not support."""
