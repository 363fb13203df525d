"""Exception types shared across the package."""


class NovadetError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(NovadetError):
    """Invalid model or experiment configuration."""


class ShapeError(NovadetError, ValueError):
    """Array arguments have incompatible shapes."""


class NumericError(NovadetError, FloatingPointError):
    """A non-finite value appeared where finite math was required."""


class DataIntegrityError(NovadetError):
    """Dataset or checkpoint file is corrupt or truncated."""


class CheckpointVersionError(NovadetError):
    """Checkpoint file has an unsupported format version."""


class UndefinedMetricError(NovadetError):
    """Metric is undefined for the given inputs (e.g. single-class labels)."""


class UsageError(NovadetError):
    """Bad command-line or config-file input; maps to exit code 2."""
