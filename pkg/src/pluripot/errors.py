"""Exception types shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all pluripot errors."""


class DomainError(ToolkitError):
    """A point lies outside the region where an object is defined."""


class UnsupportedOrderError(ToolkitError):
    """Requested jet order or dimension is outside the supported range."""


class IncompatibleJetsError(ToolkitError):
    """Jet operands disagree on base point, dimension, or order."""


class InvalidStepError(ToolkitError):
    """Finite-difference step is non-positive or below the underflow guard."""


class NotAMetricError(ToolkitError):
    """A candidate metric matrix is not positive definite."""


class DegenerateMetricError(NotAMetricError):
    """Metric matrix failed the condition-number guard."""


class InvalidParameterError(ToolkitError):
    """A constructor argument violates its documented constraints."""


class EvaluationError(ToolkitError):
    """A numerical evaluation produced non-finite or out-of-range values."""


class NoConvergenceError(ToolkitError):
    """An iterative solver failed to reach its tolerance."""


class FlowError(ToolkitError):
    """Trajectory integration failed outright."""


class ConfigError(ToolkitError):
    """Run configuration is invalid or incomplete."""
