"""HTTP gateway tying the registry, prompt engine, provider, parser, and
stores together.

Hard rules enforced here:

* prompt templates never cross the HTTP boundary, not even in errors;
* every failure becomes a well-formed error envelope, never an unhandled
  exception status;
* identical requests within the cache TTL are answered from cache, so the
  provider sees exactly one call per distinct prompt per window;
* every successful create/regenerate persists exactly one usage event
  before the response is acknowledged.
"""

from __future__ import annotations

import os
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Callable

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .catalog import build_registry
from .errors import (
    BudgetExceeded,
    GatewayError,
    InvalidRecord,
    ParseError,
    ProviderError,
    RateLimited,
    StorageFailure,
    UnknownTask,
    ValidationFailed,
)
from .parsing import SuggestionResult, parse_result
from .prompting import DEFAULT_TOKEN_BUDGET, render_prompt, validate_inputs
from .providers import ChatProvider, HttpChatProvider, ProviderConfig, complete
from .ratelimit import TokenBucketLimiter
from .storage import FeedbackRecord, FeedbackStore, UsageEvent
from .tasks import SuggestionTask, TaskRegistry

UI_DISCLAIMER = (
    "These suggestions are generated by a language model and might be "
    "incorrect or misleading. Review them before applying."
)

ENVELOPE_STATUS = {
    "validation_failed": 400,
    "unknown_task": 404,
    "rate_limited": 429,
    "provider_unavailable": 503,
    "malformed_response": 502,
    "internal": 500,
}


@dataclass(frozen=True)
class ErrorEnvelope:
    """Uniform failure shape for the HTTP API."""

    error_kind: str
    message: str
    recoverable: bool
    retry_hint: float | None = None

    def __post_init__(self) -> None:
        if self.error_kind not in ENVELOPE_STATUS:
            raise ValueError(f"unknown error_kind: {self.error_kind}")
        # Provider and parse failures are transient by definition: the UI
        # offers a reload instead of surfacing a hard error.
        if self.error_kind in ("malformed_response", "provider_unavailable") and not self.recoverable:
            raise ValueError(f"{self.error_kind} envelopes must be recoverable")

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "error_kind": self.error_kind,
            "message": self.message,
            "recoverable": self.recoverable,
            "retry_hint": self.retry_hint,
        }


@dataclass
class Settings:
    """Runtime configuration, overridable through SG_* environment variables."""

    port: int = 8080
    cache_ttl_s: float = 30.0
    rate_bucket: float = 5.0
    rate_refill: float = 0.5
    data_dir: str = "./data"
    token_budget: int = DEFAULT_TOKEN_BUDGET
    task_file: str | None = None
    provider: ProviderConfig = field(default_factory=ProviderConfig)

    @classmethod
    def from_env(cls, env: dict[str, str] | None = None) -> "Settings":
        env = dict(os.environ) if env is None else env
        provider = ProviderConfig(
            base_url=env.get("SG_LLM_BASE_URL", ProviderConfig.base_url),
            api_key_ref="SG_LLM_API_KEY",
            model_name=env.get("SG_LLM_MODEL", ProviderConfig.model_name),
            timeout=float(env.get("SG_LLM_TIMEOUT_S", ProviderConfig.timeout)),
        )
        return cls(
            port=int(env.get("SG_PORT", cls.port)),
            cache_ttl_s=float(env.get("SG_CACHE_TTL_S", cls.cache_ttl_s)),
            rate_bucket=float(env.get("SG_RATE_BUCKET", cls.rate_bucket)),
            rate_refill=float(env.get("SG_RATE_REFILL", cls.rate_refill)),
            data_dir=env.get("SG_DATA_DIR", cls.data_dir),
            task_file=env.get("SG_TASK_FILE"),
            provider=provider,
        )


class ResultCache:
    """TTL cache of suggestion results keyed by prompt hash."""

    def __init__(self, ttl_s: float, clock: Callable[[], float] = time.monotonic):
        self.ttl_s = ttl_s
        self._clock = clock
        self._entries: dict[str, tuple[float, SuggestionResult]] = {}
        self._lock = threading.Lock()

    def get(self, prompt_hash: str) -> SuggestionResult | None:
        with self._lock:
            entry = self._entries.get(prompt_hash)
            if entry is None:
                return None
            stored_at, result = entry
            if self._clock() - stored_at >= self.ttl_s:
                del self._entries[prompt_hash]
                return None
            return result

    def put(self, prompt_hash: str, result: SuggestionResult) -> None:
        with self._lock:
            now = self._clock()
            self._entries[prompt_hash] = (now, result)
            expired = [key for key, (at, _) in self._entries.items() if now - at >= self.ttl_s]
            for key in expired:
                del self._entries[key]


@dataclass
class _RetainedRequest:
    """Server-side memory of an issued result, for regenerate and stamping."""

    task_id: str
    inputs: dict[str, Any]
    attempt: int
    item_count: int | None
    expires_at: float


def _public_task_json(task: SuggestionTask) -> dict[str, Any]:
    # Deliberately excludes the prompt templates (and anything derived from
    # them): prompts live server-side only.
    return {
        "task_id": task.task_id,
        "title": task.title,
        "category": task.category.value,
        "input_fields": [
            {
                "name": spec.name,
                "required": spec.required,
                "kind": spec.kind.value,
                "max_chars": spec.max_chars,
            }
            for spec in task.input_fields
        ],
        "max_suggestions": task.max_suggestions,
        "model_name": task.model_params.model_name,
        "disclaimer": UI_DISCLAIMER,
    }


class _BadBody(Exception):
    pass


async def _read_json_object(request: Request) -> dict[str, Any]:
    try:
        data = await request.json()
    except Exception:
        raise _BadBody from None
    if not isinstance(data, dict):
        raise _BadBody
    return data


def create_app(
    settings: Settings | None = None,
    *,
    registry: TaskRegistry | None = None,
    provider: ChatProvider | None = None,
    clock: Callable[[], float] = time.monotonic,
) -> FastAPI:
    """Build the gateway application.

    ``registry``, ``provider``, and ``clock`` are injectable for tests;
    production wiring comes entirely from ``settings``.
    """
    settings = settings or Settings.from_env()
    registry = registry or build_registry(settings.task_file)
    provider = provider or HttpChatProvider(settings.provider)
    store = FeedbackStore(settings.data_dir, registry=registry)
    cache = ResultCache(settings.cache_ttl_s, clock=clock)
    limiter = TokenBucketLimiter(settings.rate_bucket, settings.rate_refill, clock=clock)

    retained: dict[str, _RetainedRequest] = {}
    retained_lock = threading.Lock()
    retention_ttl = settings.cache_ttl_s * 10

    app = FastAPI(title="suggestion-gateway", docs_url=None, redoc_url=None)
    app.state.settings = settings
    app.state.registry = registry
    app.state.provider = provider
    app.state.store = store
    app.state.cache = cache
    app.state.limiter = limiter

    def _envelope(
        kind: str, message: str, recoverable: bool, retry_hint: float | None = None
    ) -> JSONResponse:
        envelope = ErrorEnvelope(kind, message, recoverable, retry_hint)
        return JSONResponse(envelope.to_json_dict(), status_code=ENVELOPE_STATUS[kind])

    def _retain(result: SuggestionResult, inputs: dict[str, Any]) -> None:
        with retained_lock:
            now = clock()
            stale = [key for key, ctx in retained.items() if ctx.expires_at <= now]
            for key in stale:
                del retained[key]
            retained[result.result_id] = _RetainedRequest(
                task_id=result.task_id,
                inputs=dict(inputs),
                attempt=result.attempt,
                item_count=len(result.items) if result.items is not None else None,
                expires_at=now + retention_ttl,
            )

    def _resolve(result_id: str) -> _RetainedRequest | None:
        with retained_lock:
            ctx = retained.get(result_id)
            if ctx is None or ctx.expires_at <= clock():
                retained.pop(result_id, None)
                return None
            return ctx

    def _record_shown(result: SuggestionResult, kind: str) -> None:
        store.record_event(
            UsageEvent(result_id=result.result_id, kind=kind, task_id=result.task_id)
        )

    def _record_failure(task: SuggestionTask | None) -> None:
        if task is None:
            return
        try:
            store.record_event(UsageEvent(result_id="", kind="error", task_id=task.task_id))
        except (StorageFailure, InvalidRecord):
            pass  # telemetry only; the caller is already on the error path

    def _run_exchange(task: SuggestionTask, inputs: dict[str, Any], attempt: int) -> SuggestionResult:
        bundle = render_prompt(task, inputs, token_budget=settings.token_budget)
        cached = cache.get(bundle.prompt_hash) if attempt == 1 else None
        if cached is not None:
            return cached
        raw = complete(bundle, provider, max_retries=settings.provider.max_retries)
        result = parse_result(
            task,
            raw,
            model_name=settings.provider.model_name,
            prompt_hash=bundle.prompt_hash,
            attempt=attempt,
        )
        _retain(result, inputs)
        cache.put(bundle.prompt_hash, result)
        return result

    @app.get("/healthz")
    async def healthz() -> dict[str, str]:
        return {"status": "ok"}

    @app.get("/api/tasks")
    async def list_tasks() -> JSONResponse:
        try:
            return JSONResponse([_public_task_json(task) for task in registry.list_tasks()])
        except Exception:
            return _envelope("internal", "unexpected server error", False)

    @app.post("/api/suggestions")
    async def create_suggestion(request: Request) -> JSONResponse:
        task: SuggestionTask | None = None
        try:
            payload = await _read_json_object(request)
            task_id = payload.get("task_id")
            inputs = payload.get("inputs") or {}
            client_id = payload.get("client_id") or "anonymous"
            if not isinstance(task_id, str) or not task_id:
                return _envelope("validation_failed", "task_id is required", False)
            if not isinstance(inputs, dict):
                return _envelope("validation_failed", "inputs must be a JSON object", False)

            check = limiter.rate_check(str(client_id))
            if not check.allowed:
                return _envelope(
                    "rate_limited",
                    "too many suggestion requests; slow down",
                    True,
                    retry_hint=round(check.retry_after_s, 3),
                )

            task = registry.get_task(task_id)
            violations = validate_inputs(task, inputs)
            if violations:
                return _envelope(
                    "validation_failed", "; ".join(v.message for v in violations), False
                )

            result = _run_exchange(task, inputs, attempt=1)
            _record_shown(result, "shown")
            return JSONResponse(result.to_json_dict())
        except _BadBody:
            return _envelope("validation_failed", "request body must be a JSON object", False)
        except UnknownTask as exc:
            return _envelope("unknown_task", f"unknown task: {exc}", False)
        except (ValidationFailed, BudgetExceeded) as exc:
            return _envelope("validation_failed", str(exc), False)
        except ProviderError as exc:
            _record_failure(task)
            hint = exc.retry_after if isinstance(exc, RateLimited) else None
            return _envelope(
                "provider_unavailable", "the suggestion provider is unavailable", True, hint
            )
        except ParseError:
            _record_failure(task)
            return _envelope(
                "malformed_response", "the provider answer could not be parsed", True
            )
        except GatewayError:
            return _envelope("internal", "internal gateway error", False)
        except Exception:
            return _envelope("internal", "unexpected server error", False)

    @app.post("/api/suggestions/{result_id}/regenerate")
    async def regenerate(result_id: str, request: Request) -> JSONResponse:
        task: SuggestionTask | None = None
        try:
            ctx = _resolve(result_id)
            if ctx is None:
                return _envelope("validation_failed", "unknown or expired result_id", False)
            task = registry.get_task(ctx.task_id)
            ctx.attempt += 1
            result = _run_exchange(task, ctx.inputs, attempt=ctx.attempt)
            _record_shown(result, "regenerated")
            return JSONResponse(result.to_json_dict())
        except UnknownTask as exc:
            return _envelope("unknown_task", f"unknown task: {exc}", False)
        except (ValidationFailed, BudgetExceeded) as exc:
            return _envelope("validation_failed", str(exc), False)
        except ProviderError as exc:
            _record_failure(task)
            hint = exc.retry_after if isinstance(exc, RateLimited) else None
            return _envelope(
                "provider_unavailable", "the suggestion provider is unavailable", True, hint
            )
        except ParseError:
            _record_failure(task)
            return _envelope(
                "malformed_response", "the provider answer could not be parsed", True
            )
        except GatewayError:
            return _envelope("internal", "internal gateway error", False)
        except Exception:
            return _envelope("internal", "unexpected server error", False)

    @app.post("/api/feedback")
    async def post_feedback(request: Request) -> JSONResponse:
        try:
            payload = await _read_json_object(request)
            result_id = payload.get("result_id")
            if not isinstance(result_id, str) or not result_id:
                return _envelope("validation_failed", "result_id is required", False)
            ctx = _resolve(result_id)
            record = FeedbackRecord(
                result_id=result_id,
                level=payload.get("level", ""),
                helpful=payload.get("helpful") or "unset",
                correct=payload.get("correct") or "unset",
                confusing=payload.get("confusing") or "unset",
                free_text=payload.get("free_text"),
                task_id=ctx.task_id if ctx else None,
                orphan=ctx is None,
            )
            store.record_feedback(record)
            return JSONResponse({"status": "recorded", "feedback_id": record.feedback_id})
        except _BadBody:
            return _envelope("validation_failed", "request body must be a JSON object", False)
        except InvalidRecord as exc:
            return _envelope("validation_failed", str(exc), False)
        except StorageFailure:
            return _envelope("internal", "feedback could not be persisted", False)
        except Exception:
            return _envelope("internal", "unexpected server error", False)

    @app.post("/api/events")
    async def post_event(request: Request) -> JSONResponse:
        try:
            payload = await _read_json_object(request)
            result_id = payload.get("result_id", "")
            kind = payload.get("kind", "")
            item_index = payload.get("item_index")
            if item_index is not None and not isinstance(item_index, int):
                return _envelope("validation_failed", "item_index must be an integer", False)
            ctx = _resolve(result_id) if isinstance(result_id, str) and result_id else None
            if (
                kind == "accepted"
                and ctx is not None
                and ctx.item_count is not None
                and isinstance(item_index, int)
                and not 1 <= item_index <= ctx.item_count
            ):
                return _envelope(
                    "validation_failed",
                    f"item_index {item_index} outside 1..{ctx.item_count}",
                    False,
                )
            event = UsageEvent(
                result_id=result_id if isinstance(result_id, str) else "",
                kind=kind if isinstance(kind, str) else "",
                item_index=item_index,
                task_id=ctx.task_id if ctx else None,
                orphan=ctx is None,
            )
            store.record_event(event)
            return JSONResponse({"status": "recorded", "event_id": event.event_id})
        except _BadBody:
            return _envelope("validation_failed", "request body must be a JSON object", False)
        except InvalidRecord as exc:
            return _envelope("validation_failed", str(exc), False)
        except StorageFailure:
            return _envelope("internal", "event could not be persisted", False)
        except Exception:
            return _envelope("internal", "unexpected server error", False)

    @app.get("/api/stats")
    async def get_stats(request: Request) -> JSONResponse:
        try:
            task_id = request.query_params.get("task_id", "")
            if not task_id:
                return _envelope("validation_failed", "task_id query parameter is required", False)
            stats = store.aggregate_stats(task_id)
            return JSONResponse(stats.to_json_dict())
        except UnknownTask as exc:
            return _envelope("unknown_task", f"unknown task: {exc}", False)
        except Exception:
            return _envelope("internal", "unexpected server error", False)

    return app
