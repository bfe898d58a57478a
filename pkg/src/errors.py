"""Exception hierarchy shared by every module of the library."""


class SpecRelError(Exception):
    """Base class for all library errors."""


class DomainError(SpecRelError, ValueError):
    """A mathematical precondition does not hold (negative sqrt, speed >= 1, ...)."""


class UsageError(SpecRelError, ValueError):
    """Malformed input: dimension mismatch, unparsable fraction text, bad shapes."""


class SearchExhaustedError(SpecRelError, RuntimeError):
    """Certification did not succeed within the configured search depth."""


class ScenarioError(DomainError):
    """A scenario body violates its invariant; the message names the body."""
