"""Turning raw provider responses into suggestion results.

Structured tool-call payloads are the primary path; a lenient JSON
extractor recovers payloads wrapped in chatter ("Sure, I can do that.
{...}"), and open-feedback tasks fall back to plain prose when no JSON is
present at all. Every failure is a typed, recoverable error.
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any

from .errors import EmptyResult, MalformedResponse, SchemaMismatch
from .providers import RawProviderResponse, ResponseKind
from .tasks import SuggestionTask, TaskCategory

MAX_LABEL_CHARS = 200


@dataclass(frozen=True)
class SuggestionItem:
    label: str
    rank: int  # 1-based position in the returned list


@dataclass
class SuggestionResult:
    """Parsed outcome of one provider exchange, with provenance."""

    result_id: str
    task_id: str
    category: TaskCategory
    items: list[SuggestionItem] | None
    feedback_text: str | None
    model_name: str
    prompt_hash: str
    created_at: str  # RFC 3339 UTC
    latency_ms: int
    attempt: int = 1
    notes: list[str] = field(default_factory=list)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "result_id": self.result_id,
            "task_id": self.task_id,
            "category": self.category.value,
            "items": (
                [{"label": item.label, "rank": item.rank} for item in self.items]
                if self.items is not None
                else None
            ),
            "feedback_text": self.feedback_text,
            "model_name": self.model_name,
            "prompt_hash": self.prompt_hash,
            "created_at": self.created_at,
            "latency_ms": self.latency_ms,
            "attempt": self.attempt,
            "notes": list(self.notes),
        }


def utc_now_rfc3339() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


def extract_json_lenient(text: str) -> Any | None:
    """First balanced {...} or [...] substring that parses as JSON.

    Scans start positions left to right; a candidate that fails to parse
    does not stop the scan. Returns None when nothing parses. Candidates
    are always objects or arrays, so None never collides with a result.
    """
    for start, char in enumerate(text):
        if char not in "{[":
            continue
        end = _balanced_end(text, start)
        if end is None:
            continue
        try:
            return json.loads(text[start:end])
        except ValueError:
            continue
    return None


def _balanced_end(text: str, start: int) -> int | None:
    """Index one past the bracket matching text[start], honoring strings."""
    stack: list[str] = []
    in_string = False
    escaped = False
    for i in range(start, len(text)):
        char = text[i]
        if in_string:
            if escaped:
                escaped = False
            elif char == "\\":
                escaped = True
            elif char == '"':
                in_string = False
            continue
        if char == '"':
            in_string = True
        elif char in "{[":
            stack.append("}" if char == "{" else "]")
        elif char in "}]":
            if not stack or stack[-1] != char:
                return None
            stack.pop()
            if not stack:
                return i + 1
    return None


def _payload_json(raw: RawProviderResponse) -> Any | None:
    try:
        return json.loads(raw.payload)
    except ValueError:
        return extract_json_lenient(raw.payload)


def _clean_labels(entries: list[Any]) -> list[str]:
    labels: list[str] = []
    seen: set[str] = set()
    for entry in entries:
        if not isinstance(entry, str):
            continue
        label = entry.strip()[:MAX_LABEL_CHARS].strip()
        if not label:
            continue
        key = label.casefold()
        if key in seen:
            continue
        seen.add(key)
        labels.append(label)
    return labels


def parse_result(
    task: SuggestionTask,
    raw: RawProviderResponse,
    *,
    model_name: str,
    prompt_hash: str,
    latency_ms: int | None = None,
    attempt: int = 1,
) -> SuggestionResult:
    """Parse a raw response for the given task.

    Raises MalformedResponse when nothing parseable was returned,
    SchemaMismatch when JSON parsed but lacks the contracted properties,
    and EmptyResult when the response is valid but carries no content.
    All three are recoverable: the UI offers a reload.
    """
    notes: list[str] = []
    data = _payload_json(raw)

    if task.category is TaskCategory.CLOSED_RECOMMENDATION:
        if data is None:
            raise MalformedResponse("no JSON found in the provider response")
        if not isinstance(data, dict) or "suggestions" not in data:
            raise SchemaMismatch("response JSON lacks the 'suggestions' property")
        entries = data["suggestions"]
        if not isinstance(entries, list):
            raise SchemaMismatch("'suggestions' is not an array")
        labels = _clean_labels(entries)
        if not labels:
            raise EmptyResult("response contained no usable suggestions")
        limit = task.max_suggestions or len(labels)
        if len(labels) > limit:
            notes.append(f"truncated {len(labels)} suggestions to {limit}")
            labels = labels[:limit]
        items = [SuggestionItem(label=label, rank=i + 1) for i, label in enumerate(labels)]
        feedback_text = None
    else:
        if data is not None:
            if not isinstance(data, dict) or "feedback" not in data:
                raise SchemaMismatch("response JSON lacks the 'feedback' property")
            feedback = data["feedback"]
            if not isinstance(feedback, str):
                raise SchemaMismatch("'feedback' is not text")
            feedback_text = feedback.strip()
        elif raw.kind is ResponseKind.CONTENT_TEXT:
            # Prose is the product for open tasks; accept it as-is.
            feedback_text = raw.payload.strip()
            notes.append("feedback taken from plain text response")
        else:
            raise MalformedResponse("tool call arguments are not valid JSON")
        if not feedback_text:
            raise EmptyResult("response contained no feedback text")
        items = None

    return SuggestionResult(
        result_id=uuid.uuid4().hex,
        task_id=task.task_id,
        category=task.category,
        items=items,
        feedback_text=feedback_text,
        model_name=model_name,
        prompt_hash=prompt_hash,
        created_at=utc_now_rfc3339(),
        latency_ms=raw.latency_ms if latency_ms is None else latency_ms,
        attempt=attempt,
        notes=notes,
    )
