"""Exception types shared across the package."""


class GwcalcError(Exception):
    """Base class for all package-specific errors."""


class UnsupportedTargetError(GwcalcError):
    """Target (or target regime) outside the supported families."""


class QueryError(GwcalcError):
    """Malformed invariant query: bad classes, degrees, or parameters."""


class WindowError(GwcalcError):
    """A Laurent coefficient outside the validity window was requested."""


class InconsistencyError(GwcalcError):
    """Two computations disagreed on a value that must be unique."""


class CacheError(GwcalcError):
    """Cache-file format or version problem."""
