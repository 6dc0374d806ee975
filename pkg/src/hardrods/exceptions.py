"""Exception types raised across the package."""


class HardRodsError(Exception):
    """Base class for package errors."""


class DomainError(HardRodsError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class ResourceError(HardRodsError, MemoryError):
    """A computation would exceed a configured size cap."""


class IntegrationError(HardRodsError, ArithmeticError):
    """A time integration violated a conservation tolerance."""


class ConfigError(HardRodsError, ValueError):
    """A run configuration failed validation.

    ``errors`` holds every violation as ``(field, message)`` pairs.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        lines = "; ".join(f"{f}: {m}" for f, m in self.errors)
        super().__init__(f"invalid configuration: {lines}")


class SchemaError(HardRodsError, ValueError):
    """A CSV file lacks columns required by a consumer."""
