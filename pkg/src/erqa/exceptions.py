"""Exception hierarchy shared across the toolkit."""


class ErqaError(Exception):
    """Base class for every error raised by this package."""


class GeometryError(ErqaError, ValueError):
    """Frame or region dimensions are incompatible with the requested operation."""


class DecodeError(ErqaError, OSError):
    """An image file could not be decoded into a supported frame."""


class ConfigError(ErqaError, ValueError):
    """Invalid parameter combination."""


class AlignmentError(ErqaError, ValueError):
    """Item sets of metric scores and subjective scores do not line up."""


class CorrelationError(ErqaError, ValueError):
    """A correlation coefficient is undefined for the given input."""


class FittingError(ErqaError, RuntimeError):
    """Bradley-Terry fitting failed (disconnected graph or no convergence)."""


class ManifestError(ErqaError, ValueError):
    """Run manifest is malformed or the frame sets do not match."""
