"""Exception types shared across the package."""


class CapacityError(Exception):
    """A requested object exceeds a configured size cap."""


class ConfigError(Exception):
    """Invalid or inconsistent run configuration."""


class NumericError(Exception):
    """A numerical routine failed to meet its accuracy contract."""


class PropagationError(NumericError):
    """Time stepping failed to converge within its budget."""
