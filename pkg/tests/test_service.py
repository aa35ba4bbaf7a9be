from __future__ import annotations

import json
from pathlib import Path

import pytest

from suggestion_gateway import build_registry, render_prompt
from suggestion_gateway.errors import AuthFailed, ProviderTimeout, RateLimited, TransportFailure
from suggestion_gateway.providers import text_response, tool_call_response
from suggestion_gateway.service import ENVELOPE_STATUS, ErrorEnvelope

from helpers import read_jsonl

REGISTRY = build_registry()


def _hash(task_id: str, inputs: dict) -> str:
    return render_prompt(REGISTRY.get_task(task_id), inputs).prompt_hash


def _create_body(inputs=None, task_id="related-predicates", client_id="client-1"):
    return {
        "task_id": task_id,
        "inputs": inputs if inputs is not None else {"predicates": ["has method"]},
        "client_id": client_id,
    }


def _assert_envelope(response, kind, recoverable=None):
    body = response.json()
    assert set(body) == {"error_kind", "message", "recoverable", "retry_hint"}
    assert body["error_kind"] == kind
    assert response.status_code == ENVELOPE_STATUS[kind]
    if recoverable is not None:
        assert body["recoverable"] is recoverable
    return body


class TestTaskListing:
    def test_lists_all_eight_tasks(self, make_app):
        client, _, _, _ = make_app()
        body = client.get("/api/tasks").json()
        assert len(body) == 8
        assert {entry["category"] for entry in body} == {"closed_recommendation", "open_feedback"}

    def test_entry_shape_for_related_predicates(self, make_app):
        client, _, _, _ = make_app()
        entry = next(
            e for e in client.get("/api/tasks").json() if e["task_id"] == "related-predicates"
        )
        assert entry["max_suggestions"] == 5
        assert entry["input_fields"] == [
            {"name": "predicates", "required": True, "kind": "string_list", "max_chars": 10_000}
        ]
        assert "disclaimer" in entry and "might" in entry["disclaimer"]

    def test_prompt_templates_never_leave_the_server(self, make_app):
        client, _, _, _ = make_app()
        raw = client.get("/api/tasks").text
        for task in REGISTRY.list_tasks():
            for sentence in task.system_prompt_template.split(". "):
                if len(sentence) > 20:
                    assert sentence not in raw


class TestCreateSuggestion:
    def test_valid_create_returns_items(self, make_app):
        inputs = {"predicates": ["has method", "has result"]}
        script = {
            _hash("related-predicates", inputs): tool_call_response(
                {"suggestions": ["a", "b", "c", "d", "e", "f"]}
            )
        }
        client, _, _, _ = make_app(script=script)
        body = client.post("/api/suggestions", json=_create_body(inputs)).json()
        assert 1 <= len(body["items"]) <= 5
        assert body["category"] == "closed_recommendation"
        assert body["model_name"] == "test-model"
        assert body["attempt"] == 1

    def test_create_emits_one_shown_event(self, make_app, tmp_path):
        client, _, settings, _ = make_app()
        client.post("/api/suggestions", json=_create_body())
        events = read_jsonl(Path(settings.data_dir) / "events.jsonl")
        assert [e["kind"] for e in events] == ["shown"]
        assert events[0]["task_id"] == "related-predicates"

    def test_duplicate_within_ttl_hits_cache(self, make_app):
        client, provider, _, _ = make_app()
        first = client.post("/api/suggestions", json=_create_body()).json()
        second = client.post("/api/suggestions", json=_create_body()).json()
        assert first["result_id"] == second["result_id"]
        assert provider.call_count == 1

    def test_cache_expires_after_ttl(self, make_app):
        client, provider, _, clock = make_app(cache_ttl_s=30.0)
        client.post("/api/suggestions", json=_create_body())
        clock.advance(31.0)
        client.post("/api/suggestions", json=_create_body())
        assert provider.call_count == 2

    def test_different_inputs_miss_cache(self, make_app):
        client, provider, _, _ = make_app()
        client.post("/api/suggestions", json=_create_body({"predicates": ["a"]}))
        client.post("/api/suggestions", json=_create_body({"predicates": ["b"]}))
        assert provider.call_count == 2

    def test_cache_hit_still_counts_as_shown(self, make_app):
        client, _, settings, _ = make_app()
        client.post("/api/suggestions", json=_create_body())
        client.post("/api/suggestions", json=_create_body())
        events = read_jsonl(Path(settings.data_dir) / "events.jsonl")
        assert [e["kind"] for e in events] == ["shown", "shown"]

    def test_unknown_task_envelope(self, make_app):
        client, _, _, _ = make_app()
        response = client.post("/api/suggestions", json=_create_body(task_id="nonexistent"))
        _assert_envelope(response, "unknown_task", recoverable=False)

    def test_validation_envelope_names_the_field(self, make_app):
        client, _, _, _ = make_app()
        response = client.post(
            "/api/suggestions",
            json=_create_body(inputs={}, task_id="related-objects-research-problem"),
        )
        body = _assert_envelope(response, "validation_failed", recoverable=False)
        assert "title" in body["message"]

    def test_provider_timeout_degrades_gracefully(self, make_app):
        inputs = {"predicates": ["a"]}
        script = {_hash("related-predicates", inputs): ProviderTimeout("slow")}
        client, _, _, _ = make_app(script=script)
        response = client.post("/api/suggestions", json=_create_body(inputs))
        _assert_envelope(response, "provider_unavailable", recoverable=True)

    def test_provider_rate_limit_carries_hint(self, make_app):
        inputs = {"predicates": ["a"]}
        script = {_hash("related-predicates", inputs): RateLimited(retry_after=9.0)}
        client, _, _, _ = make_app(script=script)
        body = client.post("/api/suggestions", json=_create_body(inputs)).json()
        assert body["error_kind"] == "provider_unavailable"
        assert body["retry_hint"] == 9.0

    def test_malformed_payload_envelope(self, make_app):
        inputs = {"predicates": ["a"]}
        script = {_hash("related-predicates", inputs): text_response("not json at all")}
        client, _, _, _ = make_app(script=script)
        response = client.post("/api/suggestions", json=_create_body(inputs))
        _assert_envelope(response, "malformed_response", recoverable=True)

    def test_provider_failure_records_error_event(self, make_app):
        inputs = {"predicates": ["a"]}
        script = {_hash("related-predicates", inputs): TransportFailure("down")}
        client, _, settings, _ = make_app(script=script)
        client.post("/api/suggestions", json=_create_body(inputs))
        events = read_jsonl(Path(settings.data_dir) / "events.jsonl")
        assert [e["kind"] for e in events] == ["error"]

    def test_garbage_bytes_body(self, make_app):
        client, _, _, _ = make_app()
        response = client.post(
            "/api/suggestions",
            content=b"\x80\x81 not json {{{",
            headers={"content-type": "application/json"},
        )
        _assert_envelope(response, "validation_failed")

    def test_non_object_body(self, make_app):
        client, _, _, _ = make_app()
        response = client.post("/api/suggestions", json=[1, 2, 3])
        _assert_envelope(response, "validation_failed")

    def test_missing_task_id(self, make_app):
        client, _, _, _ = make_app()
        response = client.post("/api/suggestions", json={"inputs": {}})
        _assert_envelope(response, "validation_failed")

    def test_rate_limit_kicks_in(self, make_app):
        client, _, _, _ = make_app(rate_bucket=2, rate_refill=1.0)
        for _ in range(2):
            assert client.post("/api/suggestions", json=_create_body()).status_code == 200
        response = client.post("/api/suggestions", json=_create_body())
        body = _assert_envelope(response, "rate_limited", recoverable=True)
        assert body["retry_hint"] > 0

    def test_rate_limit_is_per_client(self, make_app):
        client, _, _, _ = make_app(rate_bucket=1, rate_refill=0.1)
        assert client.post("/api/suggestions", json=_create_body(client_id="a")).status_code == 200
        assert client.post("/api/suggestions", json=_create_body(client_id="a")).status_code == 429
        assert client.post("/api/suggestions", json=_create_body(client_id="b")).status_code == 200


class TestRegenerate:
    def test_regenerate_bypasses_cache_and_increments_attempt(self, make_app):
        inputs = {"predicates": ["a"]}
        script = {
            _hash("related-predicates", inputs): [
                tool_call_response({"suggestions": ["first answer"]}),
                tool_call_response({"suggestions": ["second answer"]}),
            ]
        }
        client, provider, settings, _ = make_app(script=script)
        created = client.post("/api/suggestions", json=_create_body(inputs)).json()
        regenerated = client.post(f"/api/suggestions/{created['result_id']}/regenerate").json()
        assert regenerated["attempt"] == 2
        assert regenerated["result_id"] != created["result_id"]
        assert regenerated["items"][0]["label"] == "second answer"
        assert provider.call_count == 2
        events = read_jsonl(Path(settings.data_dir) / "events.jsonl")
        assert [e["kind"] for e in events] == ["shown", "regenerated"]

    def test_regenerate_unknown_id(self, make_app):
        client, _, _, _ = make_app()
        response = client.post("/api/suggestions/deadbeef/regenerate")
        _assert_envelope(response, "validation_failed", recoverable=False)

    def test_regenerate_expired_id(self, make_app):
        client, _, _, clock = make_app(cache_ttl_s=30.0)
        created = client.post("/api/suggestions", json=_create_body()).json()
        clock.advance(301.0)  # past cache_ttl * 10
        response = client.post(f"/api/suggestions/{created['result_id']}/regenerate")
        _assert_envelope(response, "validation_failed", recoverable=False)

    def test_regenerate_recovers_after_malformed(self, make_app):
        inputs = {"predicates": ["a"]}
        script = {
            _hash("related-predicates", inputs): [
                tool_call_response({"suggestions": ["ok"]}),
                text_response("garbled"),
                tool_call_response({"suggestions": ["recovered"]}),
            ]
        }
        client, _, _, _ = make_app(script=script)
        created = client.post("/api/suggestions", json=_create_body(inputs)).json()
        rid = created["result_id"]
        failed = client.post(f"/api/suggestions/{rid}/regenerate")
        _assert_envelope(failed, "malformed_response", recoverable=True)
        recovered = client.post(f"/api/suggestions/{rid}/regenerate").json()
        assert recovered["items"][0]["label"] == "recovered"
        assert recovered["attempt"] == 3  # the failed try consumed attempt 2


class TestFeedbackEndpoint:
    def test_submit_feedback(self, make_app, tmp_path):
        client, _, settings, _ = make_app()
        created = client.post("/api/suggestions", json=_create_body()).json()
        response = client.post(
            "/api/feedback",
            json={"result_id": created["result_id"], "level": "positive", "helpful": "yes"},
        )
        assert response.status_code == 200
        records = read_jsonl(Path(settings.data_dir) / "feedback.jsonl")
        assert records[0]["level"] == "positive"
        assert records[0]["task_id"] == "related-predicates"
        assert records[0]["orphan"] is False

    def test_feedback_free_text_boundary(self, make_app):
        client, _, _, _ = make_app()
        created = client.post("/api/suggestions", json=_create_body()).json()
        response = client.post(
            "/api/feedback",
            json={"result_id": created["result_id"], "level": "neutral", "free_text": "x" * 2_001},
        )
        _assert_envelope(response, "validation_failed")

    def test_unknown_result_recorded_as_orphan(self, make_app):
        client, _, settings, _ = make_app()
        response = client.post("/api/feedback", json={"result_id": "ghost", "level": "negative"})
        assert response.status_code == 200
        records = read_jsonl(Path(settings.data_dir) / "feedback.jsonl")
        assert records[0]["orphan"] is True
        assert records[0]["task_id"] is None

    def test_bad_level_rejected(self, make_app):
        client, _, _, _ = make_app()
        response = client.post("/api/feedback", json={"result_id": "r", "level": "amazing"})
        _assert_envelope(response, "validation_failed")


class TestEventsEndpoint:
    def test_accepted_event_with_valid_index(self, make_app):
        inputs = {"predicates": ["a"]}
        script = {
            _hash("related-predicates", inputs): tool_call_response(
                {"suggestions": ["one", "two", "three", "four", "five"]}
            )
        }
        client, _, settings, _ = make_app(script=script)
        created = client.post("/api/suggestions", json=_create_body(inputs)).json()
        response = client.post(
            "/api/events", json={"result_id": created["result_id"], "kind": "accepted", "item_index": 2}
        )
        assert response.status_code == 200
        events = read_jsonl(Path(settings.data_dir) / "events.jsonl")
        assert events[-1]["item_index"] == 2

    def test_accepted_index_out_of_bounds(self, make_app):
        inputs = {"predicates": ["a"]}
        script = {
            _hash("related-predicates", inputs): tool_call_response(
                {"suggestions": ["one", "two", "three", "four", "five"]}
            )
        }
        client, _, _, _ = make_app(script=script)
        created = client.post("/api/suggestions", json=_create_body(inputs)).json()
        response = client.post(
            "/api/events", json={"result_id": created["result_id"], "kind": "accepted", "item_index": 9}
        )
        _assert_envelope(response, "validation_failed")

    def test_dismissed_event(self, make_app):
        client, _, _, _ = make_app()
        created = client.post("/api/suggestions", json=_create_body()).json()
        response = client.post(
            "/api/events", json={"result_id": created["result_id"], "kind": "dismissed"}
        )
        assert response.status_code == 200

    def test_unknown_kind_rejected(self, make_app):
        client, _, _, _ = make_app()
        response = client.post("/api/events", json={"result_id": "r", "kind": "hovered"})
        _assert_envelope(response, "validation_failed")


class TestStatsEndpoint:
    def test_stats_roundtrip(self, make_app):
        client, _, _, _ = make_app()
        created = client.post("/api/suggestions", json=_create_body()).json()
        client.post(
            "/api/events",
            json={"result_id": created["result_id"], "kind": "accepted", "item_index": 1},
        )
        stats = client.get("/api/stats", params={"task_id": "related-predicates"}).json()
        assert stats["shown_count"] == 1
        assert stats["accepted_count"] == 1
        assert stats["acceptance_rate"] == 1.0

    def test_stats_unknown_task(self, make_app):
        client, _, _, _ = make_app()
        response = client.get("/api/stats", params={"task_id": "nope"})
        _assert_envelope(response, "unknown_task")

    def test_stats_requires_task_id(self, make_app):
        client, _, _, _ = make_app()
        response = client.get("/api/stats")
        _assert_envelope(response, "validation_failed")


class TestOperationalProperties:
    def test_healthz_never_touches_the_provider(self, make_app):
        client, provider, _, _ = make_app()
        assert client.get("/healthz").json() == {"status": "ok"}
        assert provider.call_count == 0

    def test_provider_call_accounting(self, make_app):
        client, provider, _, _ = make_app()
        unique = [{"predicates": [f"p{i}"]} for i in range(4)]
        for inputs in unique:
            client.post("/api/suggestions", json=_create_body(inputs))
        for inputs in unique:  # duplicates, all cached
            client.post("/api/suggestions", json=_create_body(inputs))
        created = client.post("/api/suggestions", json=_create_body({"predicates": ["extra"]})).json()
        client.post(f"/api/suggestions/{created['result_id']}/regenerate")
        client.post(f"/api/suggestions/{created['result_id']}/regenerate")
        # 5 cache misses + 2 regenerates
        assert provider.call_count == 7

    def test_no_endpoint_ever_returns_unhandled_error(self, make_app):
        inputs = {"predicates": ["a"]}
        faults = [
            ProviderTimeout("t"),
            AuthFailed("a"),
            RateLimited(retry_after=1.0),
            TransportFailure("x"),
            tool_call_response("{broken json"),
            text_response("\x00\xff garbage bytes"),
            tool_call_response({"wrong": "shape"}),
        ]
        script = {_hash("related-predicates", inputs): faults}
        client, _, _, clock = make_app(script=script, cache_ttl_s=0.001)
        for _ in faults:
            clock.advance(1.0)
            response = client.post("/api/suggestions", json=_create_body(inputs))
            body = response.json()
            assert body["error_kind"] in ENVELOPE_STATUS
            assert isinstance(body["recoverable"], bool)

    def test_templates_concealed_even_in_error_paths(self, make_app):
        inputs = {"predicates": ["a"]}
        script = {_hash("related-predicates", inputs): TransportFailure("boom")}
        client, _, _, _ = make_app(script=script)
        responses = [
            client.post("/api/suggestions", json=_create_body(inputs)).text,
            client.post("/api/suggestions", json=_create_body(task_id="missing")).text,
            client.post("/api/suggestions", content=b"junk").text,
            client.get("/api/tasks").text,
        ]
        marker = "knowledge graph for science"  # phrase shared by most templates
        for text in responses:
            assert marker not in text

    def test_envelope_invariant_enforced_at_construction(self):
        with pytest.raises(ValueError):
            ErrorEnvelope("provider_unavailable", "x", recoverable=False)
        with pytest.raises(ValueError):
            ErrorEnvelope("made_up_kind", "x", recoverable=True)
