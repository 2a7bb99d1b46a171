"""Semantic exception hierarchy shared across the package."""


class RepotError(Exception):
    """Base class for all package errors."""


class SchemaError(RepotError):
    """Malformed measure JSON (bad structure, wrong types, unknown keys)."""


class ValidationError(RepotError):
    """Structurally valid input that violates a measure invariant."""


class DimensionMismatch(RepotError):
    """Operands live in different ambient dimensions."""


class InstanceTooLarge(RepotError):
    """Problem size exceeds the exact-solver limits."""


class NotUnimodal(RepotError):
    """Operation requires a unimodal radial measure."""


class NotLogConcave(RepotError):
    """Tilted radial density fails the discrete log-concavity test."""


class WeightTooLarge(RepotError):
    """Discrete-class constant requires every atom weight below 1/2."""


class AssumptionViolated(RepotError):
    """Unbounded cost at zero together with pointwise concentration > 1/N."""


class QuadratureNotConverged(RepotError):
    """Adaptive quadrature hit its subdivision limit."""


class OutOfRange(RepotError):
    """Argument outside the invertible range of a CDF."""


class OriginInput(RepotError):
    """The radial reflection map is undefined at the origin."""


class RejectionBudgetExceeded(RepotError):
    """Instance generator could not satisfy its constraints in time."""
