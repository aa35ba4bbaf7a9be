"""Append-only JSONL persistence for feedback and usage events.

One file per record type under the data directory: ``feedback.jsonl`` and
``events.jsonl``, one JSON object per line, timestamps in RFC 3339 UTC.
Writes are serialized per file; aggregation is a full re-scan, which is
plenty at desk scale and keeps the log the single source of truth.

Records are stamped with the task id they belong to when the gateway can
resolve it; records for unknown result ids are still stored, flagged as
orphans, and excluded from per-task aggregates.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator

from .errors import InvalidRecord, StorageFailure, UnknownTask
from .parsing import utc_now_rfc3339
from .tasks import TaskRegistry

FEEDBACK_LEVELS = ("positive", "neutral", "negative")
TRISTATE = ("yes", "no", "unset")
EVENT_KINDS = ("shown", "accepted", "regenerated", "dismissed", "error")
MAX_FREE_TEXT_CHARS = 2_000


@dataclass
class FeedbackRecord:
    """One user rating of a result: level plus optional detail flags."""

    result_id: str
    level: str
    helpful: str = "unset"
    correct: str = "unset"
    confusing: str = "unset"
    free_text: str | None = None
    feedback_id: str = field(default_factory=lambda: uuid.uuid4().hex)
    created_at: str = field(default_factory=utc_now_rfc3339)
    task_id: str | None = None
    orphan: bool = False

    def validate(self) -> None:
        if not self.result_id:
            raise InvalidRecord("feedback needs a result_id")
        if self.level not in FEEDBACK_LEVELS:
            raise InvalidRecord(f"level must be one of {FEEDBACK_LEVELS}")
        for name in ("helpful", "correct", "confusing"):
            if getattr(self, name) not in TRISTATE:
                raise InvalidRecord(f"{name} must be one of {TRISTATE}")
        if self.free_text is not None and len(self.free_text) > MAX_FREE_TEXT_CHARS:
            raise InvalidRecord(f"free_text longer than {MAX_FREE_TEXT_CHARS} chars")

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "feedback_id": self.feedback_id,
            "result_id": self.result_id,
            "level": self.level,
            "helpful": self.helpful,
            "correct": self.correct,
            "confusing": self.confusing,
            "free_text": self.free_text,
            "created_at": self.created_at,
            "task_id": self.task_id,
            "orphan": self.orphan,
        }


@dataclass
class UsageEvent:
    """One telemetry atom. ``item_index`` is 1-based and only set on accepts.

    ``result_id`` may be empty only for ``error`` events, which the gateway
    emits itself when a suggestion attempt fails before a result exists.
    """

    result_id: str
    kind: str
    item_index: int | None = None
    event_id: str = field(default_factory=lambda: uuid.uuid4().hex)
    created_at: str = field(default_factory=utc_now_rfc3339)
    task_id: str | None = None
    orphan: bool = False

    def validate(self) -> None:
        if self.kind not in EVENT_KINDS:
            raise InvalidRecord(f"kind must be one of {EVENT_KINDS}")
        if not self.result_id and self.kind != "error":
            raise InvalidRecord("event needs a result_id")
        if self.kind == "accepted":
            if self.item_index is None or self.item_index < 1:
                raise InvalidRecord("accepted events need a positive item_index")
        elif self.item_index is not None:
            raise InvalidRecord("item_index is only valid on accepted events")

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "event_id": self.event_id,
            "result_id": self.result_id,
            "kind": self.kind,
            "item_index": self.item_index,
            "created_at": self.created_at,
            "task_id": self.task_id,
            "orphan": self.orphan,
        }


@dataclass(frozen=True)
class TaskStats:
    task_id: str
    shown_count: int = 0
    accepted_count: int = 0
    regenerated_count: int = 0
    error_count: int = 0
    acceptance_rate: float = 0.0
    feedback_counts: dict[str, int] = field(
        default_factory=lambda: {level: 0 for level in FEEDBACK_LEVELS}
    )

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "task_id": self.task_id,
            "shown_count": self.shown_count,
            "accepted_count": self.accepted_count,
            "regenerated_count": self.regenerated_count,
            "error_count": self.error_count,
            "acceptance_rate": self.acceptance_rate,
            "feedback_counts": dict(self.feedback_counts),
        }


class FeedbackStore:
    """Durable append-only store for feedback records and usage events."""

    def __init__(self, data_dir: str | Path, registry: TaskRegistry | None = None):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.feedback_path = self.data_dir / "feedback.jsonl"
        self.events_path = self.data_dir / "events.jsonl"
        self._registry = registry
        self._feedback_lock = threading.Lock()
        self._events_lock = threading.Lock()

    def record_feedback(self, record: FeedbackRecord) -> None:
        record.validate()
        self._append(self.feedback_path, self._feedback_lock, record.to_json_dict())

    def record_event(self, event: UsageEvent) -> None:
        event.validate()
        self._append(self.events_path, self._events_lock, event.to_json_dict())

    def _append(self, path: Path, lock: threading.Lock, payload: dict[str, Any]) -> None:
        line = json.dumps(payload, ensure_ascii=False)
        try:
            with lock:
                with path.open("a", encoding="utf-8") as handle:
                    handle.write(line + "\n")
                    handle.flush()
                    os.fsync(handle.fileno())
        except OSError as exc:
            raise StorageFailure(f"could not append to {path.name}: {exc}") from exc

    def aggregate_stats(self, task_id: str) -> TaskStats:
        """Recount the logs for one task. Equals a brute-force recount by design."""
        if self._registry is not None and task_id not in self._registry:
            raise UnknownTask(task_id)

        shown = accepted = regenerated = errors = 0
        for event in self._iter_records(self.events_path):
            if event.get("orphan") or event.get("task_id") != task_id:
                continue
            kind = event.get("kind")
            if kind == "shown":
                shown += 1
            elif kind == "accepted":
                accepted += 1
            elif kind == "regenerated":
                regenerated += 1
            elif kind == "error":
                errors += 1

        # Resubmissions correct earlier ratings: the last record per
        # result_id wins, in append order.
        latest_level: dict[str, str] = {}
        for record in self._iter_records(self.feedback_path):
            if record.get("orphan") or record.get("task_id") != task_id:
                continue
            result_id = record.get("result_id")
            level = record.get("level")
            if isinstance(result_id, str) and level in FEEDBACK_LEVELS:
                latest_level[result_id] = level

        counts = {level: 0 for level in FEEDBACK_LEVELS}
        for level in latest_level.values():
            counts[level] += 1

        return TaskStats(
            task_id=task_id,
            shown_count=shown,
            accepted_count=accepted,
            regenerated_count=regenerated,
            error_count=errors,
            acceptance_rate=(accepted / shown) if shown else 0.0,
            feedback_counts=counts,
        )

    def _iter_records(self, path: Path) -> Iterator[dict[str, Any]]:
        """Yield parseable lines; a torn trailing line is skipped, not fatal."""
        if not path.exists():
            return
        with path.open("r", encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                except ValueError:
                    continue
                if isinstance(record, dict):
                    yield record
