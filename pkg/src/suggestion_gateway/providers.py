"""Chat-completion provider clients.

Two implementations of the same small interface: an HTTP client speaking
the de-facto chat-completions protocol with function calling, and a
deterministic in-process mock for tests and offline runs. The secret API
key is resolved from the environment at call time and never stored on the
config object or echoed into errors.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Protocol

import httpx

from .errors import (
    AuthFailed,
    ProviderError,
    ProviderRejected,
    ProviderTimeout,
    RateLimited,
    TransportFailure,
)
from .prompting import PromptBundle
from .tasks import TaskCategory

DEFAULT_BASE_URL = "https://api.openai.com/v1"
DEFAULT_TIMEOUT_S = 10.0

# Appended to the outgoing system content for open-feedback tasks; asking
# for the structured output explicitly makes the format noticeably more
# reliable. The stored templates are never modified.
FORMAT_INSTRUCTION = "Respond by calling the provided function with valid JSON arguments."


@dataclass(frozen=True)
class ProviderConfig:
    """Connection settings for the live provider.

    api_key_ref names the environment variable holding the secret; the
    secret itself must never appear in config files or logs.
    """

    base_url: str = DEFAULT_BASE_URL
    api_key_ref: str = "SG_LLM_API_KEY"
    model_name: str = "gpt-3.5-turbo"
    timeout: float = DEFAULT_TIMEOUT_S
    max_retries: int = 1

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


class ResponseKind(str, Enum):
    TOOL_CALL = "tool_call"
    CONTENT_TEXT = "content_text"


@dataclass(frozen=True)
class RawProviderResponse:
    """Provider output normalized to the two shapes the parser handles."""

    kind: ResponseKind
    payload: str
    latency_ms: int = 0
    provider_request_id: str | None = None


class ChatProvider(Protocol):
    def send(self, bundle: PromptBundle) -> RawProviderResponse:
        """Perform one completion attempt. Raises ProviderError subclasses."""


def build_chat_payload(bundle: PromptBundle, model_name: str) -> dict[str, Any]:
    """Build the chat-completions request body for a rendered prompt."""
    system_content = bundle.system_message
    if bundle.append_format_instruction:
        system_content = f"{system_content} {FORMAT_INSTRUCTION}"
    payload: dict[str, Any] = {
        "model": model_name,
        "messages": [
            {"role": "system", "content": system_content},
            {"role": "user", "content": bundle.user_message},
        ],
        "tools": [
            {
                "type": "function",
                "function": {
                    "name": bundle.tool_spec.function_name,
                    "description": bundle.tool_spec.description,
                    "parameters": bundle.tool_spec.to_json_schema(),
                },
            }
        ],
        "temperature": bundle.model_params.temperature,
        "max_tokens": bundle.model_params.max_output_tokens,
    }
    if bundle.category is TaskCategory.CLOSED_RECOMMENDATION:
        # Closed tasks force the function call; open tasks may answer in prose.
        payload["tool_choice"] = {
            "type": "function",
            "function": {"name": bundle.tool_spec.function_name},
        }
    return payload


class HttpChatProvider:
    """Speaks to a chat-completions endpoint at {base_url}/chat/completions."""

    def __init__(self, config: ProviderConfig, transport: httpx.BaseTransport | None = None):
        self.config = config
        self._client = httpx.Client(
            base_url=config.base_url.rstrip("/"),
            timeout=config.timeout,
            transport=transport,
        )

    def _api_key(self) -> str:
        key = os.environ.get(self.config.api_key_ref, "")
        if not key:
            raise AuthFailed(f"environment variable {self.config.api_key_ref} is not set")
        return key

    def send(self, bundle: PromptBundle) -> RawProviderResponse:
        payload = build_chat_payload(bundle, self.config.model_name)
        started = time.perf_counter()
        try:
            response = self._client.post(
                "/chat/completions",
                json=payload,
                headers={"Authorization": f"Bearer {self._api_key()}"},
            )
        except httpx.TimeoutException:
            raise ProviderTimeout(f"no response within {self.config.timeout}s") from None
        except httpx.HTTPError as exc:
            raise TransportFailure(f"transport error: {type(exc).__name__}") from None
        latency_ms = int((time.perf_counter() - started) * 1000)

        if response.status_code in (401, 403):
            raise AuthFailed("provider rejected the API credentials")
        if response.status_code == 429:
            raise RateLimited(retry_after=_retry_after_seconds(response))
        if response.status_code >= 500:
            raise TransportFailure(f"provider returned {response.status_code}")
        if response.status_code >= 400:
            raise ProviderRejected(
                f"provider rejected the request ({response.status_code})",
                status_code=response.status_code,
            )
        return _normalize_response(response, latency_ms)

    def close(self) -> None:
        self._client.close()


def _retry_after_seconds(response: httpx.Response) -> float | None:
    raw = response.headers.get("retry-after")
    try:
        return float(raw) if raw is not None else None
    except ValueError:
        return None


def _normalize_response(response: httpx.Response, latency_ms: int) -> RawProviderResponse:
    try:
        body = response.json()
        message = body["choices"][0]["message"]
    except (ValueError, LookupError, TypeError):
        raise TransportFailure("provider response body is not in the expected shape") from None

    request_id = body.get("id") or response.headers.get("x-request-id")
    tool_calls = message.get("tool_calls") or []
    if tool_calls:
        arguments = tool_calls[0].get("function", {}).get("arguments", "")
        return RawProviderResponse(
            kind=ResponseKind.TOOL_CALL,
            payload=arguments,
            latency_ms=latency_ms,
            provider_request_id=request_id,
        )
    content = message.get("content")
    if content is None:
        raise TransportFailure("provider response carries neither tool call nor content")
    return RawProviderResponse(
        kind=ResponseKind.CONTENT_TEXT,
        payload=content,
        latency_ms=latency_ms,
        provider_request_id=request_id,
    )


# Scripted outcomes: a canned response, an error to raise, or a callable
# deriving either from the bundle.
MockOutcome = Any


def tool_call_response(arguments: Any, latency_ms: int = 1) -> RawProviderResponse:
    """Scripted tool-call outcome; dict/list arguments are JSON-encoded."""
    payload = arguments if isinstance(arguments, str) else json.dumps(arguments)
    return RawProviderResponse(kind=ResponseKind.TOOL_CALL, payload=payload, latency_ms=latency_ms)


def text_response(text: str, latency_ms: int = 1) -> RawProviderResponse:
    """Scripted assistant-text outcome."""
    return RawProviderResponse(kind=ResponseKind.CONTENT_TEXT, payload=text, latency_ms=latency_ms)


@dataclass
class MockProvider:
    """Deterministic provider replaying scripted outcomes by prompt hash.

    Script values may be a single outcome or a sequence; sequences replay
    cyclically (call n gets outcome n mod len). Unknown hashes fall back to
    ``default`` (a Transport error unless configured otherwise).
    """

    script: dict[str, MockOutcome | list[MockOutcome]] = field(default_factory=dict)
    default: MockOutcome | None = None
    calls: list[str] = field(default_factory=list)
    _cursors: dict[str, int] = field(default_factory=dict)

    @property
    def call_count(self) -> int:
        return len(self.calls)

    def send(self, bundle: PromptBundle) -> RawProviderResponse:
        self.calls.append(bundle.prompt_hash)
        outcome: MockOutcome
        if bundle.prompt_hash in self.script:
            scripted = self.script[bundle.prompt_hash]
            if isinstance(scripted, list):
                index = self._cursors.get(bundle.prompt_hash, 0)
                self._cursors[bundle.prompt_hash] = index + 1
                outcome = scripted[index % len(scripted)]
            else:
                outcome = scripted
        elif self.default is not None:
            outcome = self.default
        else:
            outcome = TransportFailure("mock provider has no script for this prompt")

        if callable(outcome) and not isinstance(outcome, BaseException):
            outcome = outcome(bundle)
        if isinstance(outcome, BaseException):
            raise outcome
        return outcome


def mock_provider(
    script: dict[str, MockOutcome | list[MockOutcome]] | None = None,
    default: MockOutcome | None = None,
) -> MockProvider:
    """Build a scripted mock provider (see MockProvider)."""
    return MockProvider(script=dict(script or {}), default=default)


def echo_mock(bundle: PromptBundle) -> RawProviderResponse:
    """Default outcome producing a plausible canned answer for any task."""
    if bundle.category is TaskCategory.CLOSED_RECOMMENDATION:
        return tool_call_response({"suggestions": ["sample suggestion 1", "sample suggestion 2", "sample suggestion 3"]})
    return tool_call_response({"feedback": "The provided input looks reasonable; consider adding more specific detail."})


def complete(
    bundle: PromptBundle,
    provider: ChatProvider,
    *,
    max_retries: int = 0,
) -> RawProviderResponse:
    """Run one completion with bounded retries.

    Retries cover transient failures only (timeout, transport, provider
    rate limits); semantic rejections and auth failures raise immediately.
    Each attempt is bounded by the provider's own timeout, so the total
    wall clock stays within timeout * (1 + max_retries).
    """
    last_error: ProviderError | None = None
    for _ in range(1 + max_retries):
        try:
            return provider.send(bundle)
        except (ProviderTimeout, TransportFailure, RateLimited) as exc:
            last_error = exc
    assert last_error is not None
    raise last_error
