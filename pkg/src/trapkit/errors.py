"""Exception and warning types shared across the toolkit.

Warnings ("flags") mark physically meaningful but suspicious results:
an energetically closed ionization channel, a loss rate below the
measured background, a negative extracted coefficient. They never
interrupt a computation; callers that need hard failures can promote
them with the warnings module.
"""


class TrapkitError(Exception):
    """Base class for all toolkit errors."""


class UnitError(TrapkitError):
    """Unknown unit string or arithmetic across incompatible unit tags."""


class SchemaError(TrapkitError):
    """Config or input file violates the expected schema."""


class TraceFormatError(TrapkitError):
    """Malformed trace/runs CSV; message names the offending line."""


class IntegrationError(TrapkitError):
    """ODE solver failed; carries the last valid state if available."""

    def __init__(self, message, last_time=None, last_state=None):
        super().__init__(message)
        self.last_time = last_time
        self.last_state = last_state


class EstimationError(TrapkitError):
    """A fit or extraction cannot be carried out on the given data."""


class PhysicsFlag(UserWarning):
    """Base class for non-fatal physics flags attached to results."""


class BelowThresholdFlag(PhysicsFlag):
    """Photon energy does not exceed the ionization threshold."""


class BelowBackgroundFlag(PhysicsFlag):
    """Extracted rate fell below the background level (noise)."""


class UnphysicalValueFlag(PhysicsFlag):
    """Extracted quantity has an unphysical sign; returned unclipped."""
