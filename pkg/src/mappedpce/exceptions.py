"""Exception types shared across the package."""


class MappedPceError(Exception):
    """Base class for all package-specific errors."""


class DomainError(MappedPceError, ValueError):
    """An evaluation point lies outside the supported domain."""


class InvalidMapError(MappedPceError, ValueError):
    """A map fails the validity requirements (endpoints, monotonicity, oddness)."""


class NumericalError(MappedPceError, RuntimeError):
    """An iterative or numerical procedure failed to converge."""


class ProjectionError(MappedPceError, RuntimeError):
    """A model evaluation failed during pseudo-spectral projection."""


class SurrogateFormatError(MappedPceError, ValueError):
    """A surrogate file is malformed or inconsistent."""


class TableIngestionError(MappedPceError, ValueError):
    """A tabulated-model file does not match its quadrature grid."""


class ConfigError(MappedPceError, ValueError):
    """A CLI configuration file is malformed or has invalid fields."""
