"""Shared exception types."""


class ConfigError(ValueError):
    """Raised when parameters violate a documented precondition."""


class EstimationError(RuntimeError):
    """Raised when the estimator cannot proceed on the given data."""


class AllSamplesPruned(EstimationError):
    """Pruning removed every sample; estimation cannot proceed."""
