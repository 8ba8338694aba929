"""
Exception hierarchy shared by every NetFlowRL sub-package.

LP statuses (infeasible, unbounded) are reported as data on the solution
object; the classes here are reserved for misuse and numerical breakdown.
"""


class NetFlowRLError(Exception):
    """Base class for all package errors."""


class DomainError(NetFlowRLError, ValueError):
    """An argument lies outside the domain of the operation."""


class RejectedActionError(DomainError):
    """
    An action failed validation against the graph and the current state.

    Attributes:
        violations: list of Violation records explaining the rejection
    """

    def __init__(self, violations):
        self.violations = list(violations)
        summary = "; ".join(str(v) for v in self.violations[:5])
        more = "" if len(self.violations) <= 5 else f" (+{len(self.violations) - 5} more)"
        super().__init__(f"action rejected: {summary}{more}")


class SolverError(NetFlowRLError, RuntimeError):
    """The simplex solver broke down numerically or ran out of iterations."""


class ConfigError(DomainError):
    """A configuration field is missing or invalid."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class CheckpointError(DomainError):
    """A parameter checkpoint does not match the policy it is loaded into."""


class TripRecordError(DomainError):
    """A trip-record file is malformed."""

    def __init__(self, message, lines=()):
        self.lines = list(lines)
        if self.lines:
            shown = ", ".join(str(n) for n in self.lines[:10])
            message = f"{message} (lines {shown}{', ...' if len(self.lines) > 10 else ''})"
        super().__init__(message)


class TopologyMismatchError(DomainError):
    """A fixed-size policy was asked to act on a graph of another size."""
