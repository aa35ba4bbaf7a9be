"""Suggestion gateway: server-held prompts, structured LLM calls, parsed
suggestions, feedback telemetry, and a stability probe."""

from .catalog import build_registry, builtin_tasks
from .errors import GatewayError
from .parsing import SuggestionItem, SuggestionResult, extract_json_lenient, parse_result
from .prompting import PromptBundle, estimate_tokens, render_prompt, validate_inputs
from .providers import (
    HttpChatProvider,
    MockProvider,
    ProviderConfig,
    RawProviderResponse,
    complete,
    mock_provider,
    text_response,
    tool_call_response,
)
from .service import ErrorEnvelope, Settings, create_app
from .stability import StabilityReport, run_probe
from .storage import FeedbackRecord, FeedbackStore, TaskStats, UsageEvent
from .tasks import (
    FieldSpec,
    ModelParams,
    OutputSchema,
    SuggestionTask,
    TaskCategory,
    TaskRegistry,
)

__all__ = [
    "ErrorEnvelope",
    "FeedbackRecord",
    "FeedbackStore",
    "FieldSpec",
    "GatewayError",
    "HttpChatProvider",
    "MockProvider",
    "ModelParams",
    "OutputSchema",
    "PromptBundle",
    "ProviderConfig",
    "RawProviderResponse",
    "Settings",
    "StabilityReport",
    "SuggestionItem",
    "SuggestionResult",
    "SuggestionTask",
    "TaskCategory",
    "TaskRegistry",
    "TaskStats",
    "UsageEvent",
    "build_registry",
    "builtin_tasks",
    "complete",
    "create_app",
    "estimate_tokens",
    "extract_json_lenient",
    "mock_provider",
    "parse_result",
    "render_prompt",
    "run_probe",
    "text_response",
    "tool_call_response",
    "validate_inputs",
]
