"""Exception types shared across the package."""


class GridGameError(Exception):
    """Base class for all errors raised by this package."""


class NetworkParseError(GridGameError):
    """Network document is malformed; message carries the offending location."""


class NetworkValidationError(GridGameError):
    """Network document parsed but violates a structural invariant."""


class RadialityError(GridGameError):
    """An energized island contains a loop, which the sweep solver cannot handle."""


class CatalogError(GridGameError):
    """Attack/defense catalog references a component that does not exist."""


class SolverError(GridGameError):
    """A game solver hit a state it cannot recover from (degenerate LP, bad input)."""


class ConfigError(GridGameError):
    """A run configuration value is out of its documented range."""
