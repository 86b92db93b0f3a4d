"""Error taxonomy for the planning system.

Every raised condition is a PlannerError subclass so that callers (and
the CLI) can map failures to exit classes: validation problems, resource
and schema problems, and internal invariant breaches.
"""
from __future__ import annotations


class PlannerError(Exception):
    """Base class for all domain errors."""


class InvalidProfile(PlannerError):
    """Profile failed domain validation; carries the violation list."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("invalid profile: " + "; ".join(violations))


class ConfigError(PlannerError):
    """Configuration file is malformed or inconsistent."""


class BinOutOfRange(PlannerError):
    """A numeric attribute falls outside every configured bin."""

    def __init__(self, segment: str, value: float, context: str | None = None):
        self.segment = segment
        self.value = value
        self.context = context
        message = f"value {value!r} outside all bins of segment {segment!r}"
        if context:
            message = f"{context}: {message}"
        super().__init__(message)


class UnknownShape(PlannerError):
    """Shape class index not present in the shape catalog."""

    def __init__(self, shape_class: int, catalog_size: int):
        self.shape_class = shape_class
        super().__init__(
            f"shape class {shape_class} not in catalog (0..{catalog_size - 1})"
        )


class AmbiguousSegment(PlannerError):
    """A one-hot segment holds zero or multiple active nodes."""

    def __init__(self, segment: str, active: int):
        self.segment = segment
        self.active = active
        super().__init__(
            f"segment {segment!r} requires exactly one active node, found {active}"
        )


class InconsistentParts(PlannerError):
    """Active part segments contradict the decoded die type."""

    def __init__(self, detail: str):
        super().__init__(f"part segments inconsistent with die type: {detail}")


class DimensionMismatch(PlannerError):
    """Vector length does not match the model or codec layout."""

    def __init__(self, expected: int, got: int, what: str = "vector"):
        super().__init__(f"{what} length {got}, expected {expected}")


class EmptyDataset(PlannerError):
    """Training requires at least one pattern."""


class NonFiniteLoss(PlannerError):
    """Training diverged: epoch error is NaN or infinite."""

    def __init__(self, epoch: int):
        self.epoch = epoch
        super().__init__(f"non-finite training error at epoch {epoch}")


class NoRule(PlannerError):
    """No decision-table row exists for a (feature, part) pair."""

    def __init__(self, feature: str, part: str):
        self.feature = feature
        self.part = part
        super().__init__(f"no machining rule for feature {feature!r} on part {part!r}")


class NonPositiveInput(PlannerError):
    """A physical quantity that must be strictly positive is not."""

    def __init__(self, name: str, value: float):
        self.name = name
        self.value = value
        super().__init__(f"{name} must be > 0, got {value!r}")


class UnitMismatch(PlannerError):
    """Operands from different unit systems were combined."""

    def __init__(self, left: str, right: str):
        super().__init__(f"incompatible units: {left!r} vs {right!r}")


class MissingParams(PlannerError):
    """An operation cannot be estimated for lack of volume or parameters."""

    def __init__(self, operation: str, detail: str):
        self.operation = operation
        super().__init__(f"cannot estimate {operation!r}: {detail}")


class VersionMismatch(PlannerError):
    """Persisted artifact was written under a different codec version."""

    def __init__(self, stored: str, active: str):
        super().__init__(f"codec version {stored!r} does not match active {active!r}")


class SchemaMismatch(PlannerError):
    """Persisted artifact violates its file schema."""


class EmptyLibrary(PlannerError):
    """Retrieval requires a non-empty case library."""


class InternalError(PlannerError):
    """An internal invariant was breached; indicates a bug."""
