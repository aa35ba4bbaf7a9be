"""Exception taxonomy shared across the gateway.

Every failure the gateway can produce is a subclass of :class:`GatewayError`,
so callers (and the HTTP layer) can catch one type and map it to the error
envelope without ever letting an unhandled exception escape.
"""

from __future__ import annotations


class GatewayError(Exception):
    """Base class for all gateway failures."""


# --- task registry ---

class DuplicateTaskId(GatewayError):
    """A task with this id is already registered."""


class UnknownTask(GatewayError):
    """No task registered under the requested id."""


class InvalidTask(GatewayError):
    """A task definition violates one or more structural invariants."""

    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("; ".join(violations))


class RegistryFrozen(GatewayError):
    """register_task called after the startup phase ended."""


# --- prompt rendering ---

class ValidationFailed(GatewayError):
    """User inputs failed validation; carries the violation list."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(v.message for v in self.violations))


class BudgetExceeded(GatewayError):
    """Rendered prompt exceeds the configured token budget."""


# --- provider ---

class ProviderError(GatewayError):
    """Base class for chat-completion provider failures."""


class ProviderTimeout(ProviderError):
    """The provider did not answer within the configured timeout."""


class AuthFailed(ProviderError):
    """The provider rejected our credentials (or none were configured)."""


class RateLimited(ProviderError):
    """The provider returned a rate-limit response."""

    def __init__(self, message: str = "provider rate limit hit", retry_after: float | None = None):
        self.retry_after = retry_after
        super().__init__(message)


class TransportFailure(ProviderError):
    """Network-level failure or a 5xx/garbled response from the provider."""


class ProviderRejected(ProviderError):
    """The provider returned a semantic 4xx error; retrying will not help."""

    def __init__(self, message: str, status_code: int | None = None):
        self.status_code = status_code
        super().__init__(message)


# --- response parsing ---

class ParseError(GatewayError):
    """Base class for response-parsing failures. All are recoverable."""


class MalformedResponse(ParseError):
    """No JSON (or usable text) could be extracted from the response."""


class SchemaMismatch(ParseError):
    """JSON parsed but lacks the properties the task schema requires."""


class EmptyResult(ParseError):
    """Schema-valid response with zero usable content."""


# --- persistence ---

class InvalidRecord(GatewayError):
    """A feedback record or usage event fails its field constraints."""


class StorageFailure(GatewayError):
    """The append-only log could not be written."""
