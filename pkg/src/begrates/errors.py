"""Exception hierarchy.

Two broad classes matter to callers (and to the CLI exit codes): bad inputs
(`ValidationError`) versus failures that arise while computing
(`ComputationError`).
"""


class BegratesError(Exception):
    """Base class for all package errors."""


class ValidationError(BegratesError, ValueError):
    """Invalid or inconsistent inputs."""


class ComputationError(BegratesError, RuntimeError):
    """A computation could not be carried out with the given inputs."""


class ScheduleUnderflowError(ComputationError):
    """A parameter schedule produced beta_n <= 0 or K_n <= 0 at this n."""


class CapExceededError(ComputationError):
    """Requested n exceeds the exact-enumeration cap; use the sampler instead."""


class NonIntegrableDensityError(ComputationError):
    """Leading polynomial coefficient is not positive; exp(-poly) has infinite mass."""


class DegenerateFitError(ComputationError):
    """Log-log regression has no slope information (all distances equal)."""


class InvalidCaseParametersError(ValidationError):
    """Case parameters violate the branch predicate of the rate table."""
