from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from suggestion_gateway.errors import BudgetExceeded, ValidationFailed
from suggestion_gateway.prompting import (
    estimate_tokens,
    prompt_digest,
    render_prompt,
    validate_inputs,
)

from golden_prompts import GOLDEN_SYSTEM, SAMPLE_INPUTS


class TestValidateInputs:
    def test_valid_inputs_produce_no_violations(self, registry):
        task = registry.get_task("related-predicates")
        assert validate_inputs(task, {"predicates": ["has method", "has result"]}) == []

    def test_missing_required_field(self, registry):
        task = registry.get_task("related-objects-research-problem")
        violations = validate_inputs(task, {"abstract": "some text"})
        assert [(v.code, v.field) for v in violations] == [("missing_required", "title")]

    def test_too_long_boundary(self, registry):
        task = registry.get_task("literal-applicability")
        assert validate_inputs(task, {"label": "x" * 10_000}) == []
        violations = validate_inputs(task, {"label": "x" * 10_001})
        assert [(v.code, v.field) for v in violations] == [("too_long", "label")]

    def test_unknown_field_reported(self, registry):
        task = registry.get_task("literal-applicability")
        violations = validate_inputs(task, {"label": "ok", "bogus": "nope"})
        assert ("unknown_field", "bogus") in [(v.code, v.field) for v in violations]

    def test_wrong_type_reported(self, registry):
        task = registry.get_task("literal-applicability")
        violations = validate_inputs(task, {"label": 17})
        assert [(v.code) for v in violations] == ["invalid_type"]

    def test_absent_optional_is_fine(self, registry):
        task = registry.get_task("related-objects-research-problem")
        assert validate_inputs(task, {"title": "A title"}) == []


class TestRenderPrompt:
    def test_list_fields_join_with_comma_space(self, registry):
        task = registry.get_task("related-predicates")
        bundle = render_prompt(task, {"predicates": ["has method", "has result"]})
        assert bundle.user_message == "The existing predicates are: has method, has result"

    def test_description_passes_through_verbatim(self, registry):
        task = registry.get_task("comparison-descriptiveness")
        bundle = render_prompt(task, {"description": "A comparison of sea level models"})
        assert bundle.user_message == "A comparison of sea level models"

    def test_title_and_abstract_joined_by_newline(self, registry):
        task = registry.get_task("related-objects-research-problem")
        bundle = render_prompt(task, {"title": "T", "abstract": "Abs."})
        assert bundle.user_message == "T\nAbs."

    def test_absent_optional_leaves_no_residue(self, registry):
        task = registry.get_task("related-objects-method")
        bundle = render_prompt(task, {"title": "Only a title"})
        assert bundle.user_message == "Only a title"
        assert "{" not in bundle.user_message

    def test_system_message_is_untouched_template(self, registry):
        for task_id, inputs in SAMPLE_INPUTS.items():
            task = registry.get_task(task_id)
            bundle = render_prompt(task, inputs)
            assert bundle.system_message == GOLDEN_SYSTEM[task_id]

    def test_hash_is_deterministic(self, registry):
        task = registry.get_task("related-predicates")
        inputs = {"predicates": ["a", "b"]}
        assert render_prompt(task, inputs).prompt_hash == render_prompt(task, inputs).prompt_hash

    def test_hash_changes_with_inputs(self, registry):
        task = registry.get_task("related-predicates")
        first = render_prompt(task, {"predicates": ["a"]}).prompt_hash
        second = render_prompt(task, {"predicates": ["b"]}).prompt_hash
        assert first != second

    def test_hash_distinguishes_tasks_with_same_inputs(self, registry):
        inputs = {"label": "some label"}
        h1 = render_prompt(registry.get_task("literal-applicability"), inputs).prompt_hash
        h2 = render_prompt(registry.get_task("decomposable-resources"), inputs).prompt_hash
        assert h1 != h2

    def test_invalid_inputs_raise_validation_failed(self, registry):
        task = registry.get_task("related-predicates")
        with pytest.raises(ValidationFailed):
            render_prompt(task, {})

    def test_budget_exceeded(self, registry):
        task = registry.get_task("literal-applicability")
        with pytest.raises(BudgetExceeded):
            render_prompt(task, {"label": "x" * 8_000}, token_budget=100)

    def test_open_tasks_ask_for_structured_output(self, registry):
        open_bundle = render_prompt(
            registry.get_task("literal-applicability"), {"label": "x"}
        )
        closed_bundle = render_prompt(
            registry.get_task("related-predicates"), {"predicates": ["a"]}
        )
        assert open_bundle.append_format_instruction
        assert not closed_bundle.append_format_instruction


class TestEstimateTokens:
    def test_empty_string(self):
        assert estimate_tokens("") == 0

    def test_eight_ascii_bytes(self):
        assert estimate_tokens("12345678") == 2

    def test_rounds_up(self):
        assert estimate_tokens("123456789") == 3

    def test_multibyte_counts_bytes(self):
        assert estimate_tokens("ü") == 1  # 2 utf-8 bytes -> ceil(2/4)

    @settings(max_examples=60)
    @given(st.text(max_size=300), st.text(max_size=300))
    def test_monotone_under_concatenation(self, a, b):
        assert estimate_tokens(a + b) >= max(estimate_tokens(a), estimate_tokens(b))


@settings(max_examples=60)
@given(
    st.lists(
        st.text(
            alphabet=st.characters(blacklist_characters="{}\x00", blacklist_categories=("Cs",)),
            min_size=1,
            max_size=40,
        ).filter(str.strip),
        min_size=1,
        max_size=5,
    )
)
def test_rendering_never_leaves_placeholders(registry_module, predicates):
    task = registry_module.get_task("related-predicates")
    bundle = render_prompt(task, {"predicates": predicates})
    assert "{predicates}" not in bundle.user_message
    assert bundle.system_message
    assert bundle.prompt_hash == prompt_digest(
        task.task_id, bundle.system_message, bundle.user_message
    )


@pytest.fixture(scope="module")
def registry_module():
    from suggestion_gateway import build_registry

    return build_registry()
