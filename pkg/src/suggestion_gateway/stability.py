"""Stability probe: fire N identical prompts and quantify agreement.

Responses to the very same prompt can differ run to run, even at
temperature zero, so this harness makes that variability measurable:
parse rate, distinct normalized answers, modal agreement, suggestion-set
overlap, and latency percentiles. Every run's raw outcome is written to a
JSONL transcript so the report can be recounted independently.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from itertools import combinations
from pathlib import Path
from typing import Any, Mapping

from .errors import GatewayError, ValidationFailed
from .parsing import parse_result
from .prompting import render_prompt, validate_inputs
from .providers import ChatProvider, complete
from .tasks import SuggestionTask, TaskCategory, TaskRegistry


@dataclass(frozen=True)
class StabilityReport:
    task_id: str
    n: int
    parse_success_count: int
    distinct_normalized_responses: int
    agreement: float  # modal normalized response frequency / n
    per_item_overlap: float | None  # mean pairwise Jaccard, closed tasks only
    latency_p50_ms: int
    latency_p95_ms: int
    all_failed: bool
    transcript_path: str

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "task_id": self.task_id,
            "n": self.n,
            "parse_success_count": self.parse_success_count,
            "distinct_normalized_responses": self.distinct_normalized_responses,
            "agreement": self.agreement,
            "per_item_overlap": self.per_item_overlap,
            "latency_p50_ms": self.latency_p50_ms,
            "latency_p95_ms": self.latency_p95_ms,
            "all_failed": self.all_failed,
            "transcript_path": self.transcript_path,
        }


def normalize_text(text: str) -> str:
    """Trim, lowercase, collapse whitespace."""
    return " ".join(text.split()).lower()


def normalize_labels(labels: list[str]) -> list[str]:
    return sorted(normalize_text(label) for label in labels)


def percentile_nearest_rank(values: list[int], q: float) -> int:
    """Nearest-rank percentile; q in (0, 1]."""
    if not values:
        return 0
    ordered = sorted(values)
    rank = max(1, math.ceil(len(ordered) * q))
    return ordered[rank - 1]


def run_probe(
    registry: TaskRegistry,
    task_id: str,
    inputs: Mapping[str, Any],
    n: int,
    provider: ChatProvider,
    *,
    temperature: float | None = None,
    out_dir: str | Path = ".",
) -> StabilityReport:
    """Send the identical prompt n times and measure response agreement.

    Provider and parse failures are recorded as failed runs, never raised;
    a run where everything fails is a valid measurement. The probe talks to
    the provider directly, so no gateway cache can absorb calls.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    task = registry.get_task(task_id)
    violations = validate_inputs(task, inputs)
    if violations:
        raise ValidationFailed(violations)

    bundle = render_prompt(task, inputs)
    if temperature is not None:
        bundle = replace(bundle, model_params=replace(bundle.model_params, temperature=temperature))

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S%fZ")
    transcript_path = out_dir / f"probe-{task_id}-{stamp}.jsonl"

    keys: list[str] = []
    label_sets: list[set[str]] = []
    latencies: list[int] = []

    with transcript_path.open("w", encoding="utf-8") as transcript:
        for run in range(n):
            row: dict[str, Any] = {"run": run + 1, "task_id": task_id}
            started = time.perf_counter()
            try:
                raw = complete(bundle, provider, max_retries=0)
                result = parse_result(
                    task,
                    raw,
                    model_name=bundle.model_params.model_name,
                    prompt_hash=bundle.prompt_hash,
                )
                latency = raw.latency_ms or int((time.perf_counter() - started) * 1000)
                if task.category is TaskCategory.CLOSED_RECOMMENDATION:
                    labels = normalize_labels([item.label for item in result.items or []])
                    key = json.dumps(labels)
                    label_sets.append(set(labels))
                    row["items"] = [item.label for item in result.items or []]
                else:
                    key = normalize_text(result.feedback_text or "")
                    row["feedback_text"] = result.feedback_text
                keys.append(key)
                row.update(ok=True, payload=raw.payload, normalized=key, latency_ms=latency)
            except GatewayError as exc:
                latency = int((time.perf_counter() - started) * 1000)
                row.update(
                    ok=False,
                    error=f"{type(exc).__name__}: {exc}",
                    normalized=None,
                    latency_ms=latency,
                )
            latencies.append(row["latency_ms"])
            transcript.write(json.dumps(row, ensure_ascii=False) + "\n")

    parse_success = len(keys)
    counts: dict[str, int] = {}
    for key in keys:
        counts[key] = counts.get(key, 0) + 1
    agreement = (max(counts.values()) / n) if counts else 0.0

    overlap: float | None = None
    if task.category is TaskCategory.CLOSED_RECOMMENDATION and len(label_sets) >= 2:
        similarities = [
            len(a & b) / len(a | b) if (a | b) else 1.0
            for a, b in combinations(label_sets, 2)
        ]
        overlap = sum(similarities) / len(similarities)

    return StabilityReport(
        task_id=task_id,
        n=n,
        parse_success_count=parse_success,
        distinct_normalized_responses=len(counts),
        agreement=agreement,
        per_item_overlap=overlap,
        latency_p50_ms=percentile_nearest_rank(latencies, 0.50),
        latency_p95_ms=percentile_nearest_rank(latencies, 0.95),
        all_failed=parse_success == 0,
        transcript_path=str(transcript_path),
    )
