"""Shared test utilities: independent oracles and a controllable clock.

The oracles here deliberately re-derive results from first principles
(brute-force substring search, plain recounts over files) so they stay
independent of the code paths they check.
"""

from __future__ import annotations

import json
import random
from pathlib import Path


class FakeClock:
    """Monotonic clock under test control."""

    def __init__(self, start: float = 1000.0):
        self.now = start

    def __call__(self) -> float:
        return self.now

    def advance(self, seconds: float) -> None:
        self.now += seconds


def brute_force_first_json(text: str):
    """First substring that parses as JSON, trying every (start, end) pair.

    Candidates start at any '{' or '[' and are ordered by start position,
    then end position. O(n^3), fine at test scale, and fully independent of
    the production extractor's bracket matching.
    """
    n = len(text)
    for i in range(n):
        if text[i] not in "{[":
            continue
        for j in range(i + 1, n + 1):
            try:
                return json.loads(text[i:j])
            except ValueError:
                continue
    return None


_PREFIXES = [
    "",
    "Sure, I can do that. ",
    "Sure! Here is the JSON you asked for:\n",
    "Of course.\n\n",
    'broken decoy first: {"bad": } then ',
    "unbalanced { noise ",
    "array decoy [1, 2, then ",
    "```json\n",
]

_SUFFIXES = [
    "",
    " hope this helps!",
    "\n```",
    " }} ]] trailing brackets",
    "\nLet me know if you need anything else.",
]

_NOISE_ONLY = [
    "no json here",
    "just { an opener",
    "mismatched {]} oops",
    '"a bare string"',
    "12345",
    "]{",
    "{'single': 'quotes'}",
    "{\"unterminated\": \"string}",
]


def random_json_value(rng: random.Random, depth: int = 0):
    """Small random JSON value; always an object or array at the top."""
    words = ["alpha", "beta", "gamma", "delta", "covid spread", "sea level", "x y"]
    if depth > 1 or rng.random() < 0.5:
        leaf = lambda: rng.choice(
            [rng.choice(words), rng.randint(-50, 50), rng.random() > 0.5, None]
        )
    else:
        leaf = lambda: random_json_value(rng, depth + 1)
    if rng.random() < 0.5:
        return {rng.choice(words): leaf() for _ in range(rng.randint(1, 3))}
    return [leaf() for _ in range(rng.randint(0, 4))]


def noisy_payload_cases(seed: int = 7, count: int = 220) -> list[tuple[str, object]]:
    """(payload, embedded_value) pairs; embedded_value is None for pure noise."""
    rng = random.Random(seed)
    cases: list[tuple[str, object]] = []
    while len(cases) < count:
        if len(cases) % 6 == 5:
            cases.append((rng.choice(_NOISE_ONLY), None))
            continue
        value = random_json_value(rng)
        payload = rng.choice(_PREFIXES) + json.dumps(value) + rng.choice(_SUFFIXES)
        cases.append((payload, value))
    return cases


def read_jsonl(path: str | Path) -> list[dict]:
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line:
            rows.append(json.loads(line))
    return rows


def recount_task_stats(data_dir: str | Path, task_id: str) -> dict:
    """Recount one task's stats straight from the JSONL files."""
    data_dir = Path(data_dir)
    counts = {"shown": 0, "accepted": 0, "regenerated": 0, "error": 0}
    events_path = data_dir / "events.jsonl"
    if events_path.exists():
        for row in read_jsonl(events_path):
            if row.get("orphan") or row.get("task_id") != task_id:
                continue
            kind = row.get("kind")
            if kind in counts:
                counts[kind] += 1

    last_level: dict[str, str] = {}
    feedback_path = data_dir / "feedback.jsonl"
    if feedback_path.exists():
        for row in read_jsonl(feedback_path):
            if row.get("orphan") or row.get("task_id") != task_id:
                continue
            last_level[row["result_id"]] = row["level"]
    levels = {"positive": 0, "neutral": 0, "negative": 0}
    for level in last_level.values():
        levels[level] += 1

    return {
        "task_id": task_id,
        "shown_count": counts["shown"],
        "accepted_count": counts["accepted"],
        "regenerated_count": counts["regenerated"],
        "error_count": counts["error"],
        "acceptance_rate": counts["accepted"] / counts["shown"] if counts["shown"] else 0.0,
        "feedback_counts": levels,
    }


def recount_stability(transcript_path: str | Path) -> dict:
    """Recompute the probe report numbers from its transcript."""
    rows = read_jsonl(transcript_path)
    n = len(rows)
    keys = [row["normalized"] for row in rows if row.get("ok")]
    tally: dict[str, int] = {}
    for key in keys:
        tally[key] = tally.get(key, 0) + 1
    latencies = sorted(row["latency_ms"] for row in rows)

    def nearest_rank(q: float) -> int:
        if not latencies:
            return 0
        import math

        return latencies[max(1, math.ceil(len(latencies) * q)) - 1]

    sets = [set(json.loads(row["normalized"])) for row in rows if row.get("ok") and "items" in row]
    overlap = None
    if len(sets) >= 2:
        pairs = [
            (a, b) for idx, a in enumerate(sets) for b in sets[idx + 1 :]
        ]
        overlap = sum(
            (len(a & b) / len(a | b)) if (a | b) else 1.0 for a, b in pairs
        ) / len(pairs)

    return {
        "n": n,
        "parse_success_count": len(keys),
        "distinct_normalized_responses": len(tally),
        "agreement": (max(tally.values()) / n) if tally else 0.0,
        "per_item_overlap": overlap,
        "latency_p50_ms": nearest_rank(0.50),
        "latency_p95_ms": nearest_rank(0.95),
        "all_failed": not keys,
    }
