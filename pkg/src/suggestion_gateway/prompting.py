"""Prompt rendering: user-input validation, template substitution, budgets.

Rendering is a pure function of (task, inputs). Template text outside the
placeholder spans is never altered, so the catalog wording survives into
the outgoing messages byte-for-byte.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from typing import Any, Mapping

from .errors import BudgetExceeded, ValidationFailed
from .tasks import PLACEHOLDER_RE, FieldKind, ModelParams, OutputSchema, SuggestionTask, TaskCategory

DEFAULT_TOKEN_BUDGET = 3_000

# Gap marker for absent optional fields. _stringify strips NUL from user
# values, so the marker cannot collide with real content. Whitespace around
# a gap collapses to a single space; the outer edges are trimmed afterwards.
_GAP = "\x00"
_GAP_RE = re.compile(r"\s*(?:\x00\s*)+")


@dataclass(frozen=True)
class Violation:
    """One input problem. Violations are data, not exceptions."""

    code: str  # missing_required | too_long | unknown_field | invalid_type
    field: str
    message: str


def missing_required(name: str) -> Violation:
    return Violation("missing_required", name, f"required field missing: {name}")


def too_long(name: str, limit: int) -> Violation:
    return Violation("too_long", name, f"field too long: {name} (max {limit} chars)")


@dataclass(frozen=True)
class PromptBundle:
    """Fully rendered prompt plus everything the provider call needs."""

    task_id: str
    category: TaskCategory
    system_message: str
    user_message: str
    tool_spec: OutputSchema
    model_params: ModelParams
    prompt_hash: str
    # Provider directive: append the fixed structured-output sentence to the
    # outgoing system content (open-feedback tasks that opt in).
    append_format_instruction: bool = False


def estimate_tokens(text: str) -> int:
    """Cheap provider-agnostic token estimate: ceil(utf-8 bytes / 4)."""
    return (len(text.encode("utf-8")) + 3) // 4


def prompt_digest(task_id: str, system_message: str, user_message: str) -> str:
    """Stable content digest used for caching and mock scripting."""
    h = hashlib.sha256()
    for part in (task_id, system_message, user_message):
        h.update(part.encode("utf-8"))
        h.update(b"\x00")
    return h.hexdigest()


def validate_inputs(task: SuggestionTask, inputs: Mapping[str, Any]) -> list[Violation]:
    """Check inputs against the task's field specs. Empty list means valid."""
    violations: list[Violation] = []
    fields = task.field_map()
    for name in inputs:
        if name not in fields:
            violations.append(Violation("unknown_field", name, f"unknown field: {name}"))
    for spec in task.input_fields:
        value = inputs.get(spec.name)
        if value is None or (isinstance(value, str) and not value.strip()) or value == []:
            if spec.required:
                violations.append(missing_required(spec.name))
            continue
        if spec.kind is FieldKind.STRING_LIST:
            if isinstance(value, str):
                value = [value]
            if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
                violations.append(
                    Violation("invalid_type", spec.name, f"field must be a list of strings: {spec.name}")
                )
                continue
            rendered = ", ".join(v.strip() for v in value)
        else:
            if not isinstance(value, str):
                violations.append(Violation("invalid_type", spec.name, f"field must be text: {spec.name}"))
                continue
            rendered = value
        if len(rendered) > spec.max_chars:
            violations.append(too_long(spec.name, spec.max_chars))
    return violations


def _stringify(spec, value: Any) -> str:
    if value is None or value == [] or (isinstance(value, str) and not value.strip()):
        return ""
    if spec.kind is FieldKind.STRING_LIST:
        items = [value] if isinstance(value, str) else value
        text = ", ".join(v.strip() for v in items)
    else:
        text = value
    return text.replace(_GAP, "")


def _substitute(template: str, values: Mapping[str, str]) -> str:
    def repl(match: re.Match[str]) -> str:
        name = match.group(1)
        if name not in values:
            return match.group(0)
        return values[name] or _GAP

    rendered = PLACEHOLDER_RE.sub(repl, template)
    rendered = _GAP_RE.sub(" ", rendered)
    return rendered.strip()


def render_prompt(
    task: SuggestionTask,
    inputs: Mapping[str, Any],
    *,
    token_budget: int = DEFAULT_TOKEN_BUDGET,
) -> PromptBundle:
    """Render the task templates with the given inputs.

    Raises ValidationFailed when validate_inputs reports problems and
    BudgetExceeded when the estimated prompt size exceeds the budget.
    """
    violations = validate_inputs(task, inputs)
    if violations:
        raise ValidationFailed(violations)

    values = {spec.name: _stringify(spec, inputs.get(spec.name)) for spec in task.input_fields}
    system_message = _substitute(task.system_prompt_template, values)
    user_message = _substitute(task.user_prompt_template, values)

    if estimate_tokens(system_message) + estimate_tokens(user_message) > token_budget:
        raise BudgetExceeded(f"prompt exceeds the {token_budget}-token budget")

    return PromptBundle(
        task_id=task.task_id,
        category=task.category,
        system_message=system_message,
        user_message=user_message,
        tool_spec=task.output_schema,
        model_params=task.model_params,
        prompt_hash=prompt_digest(task.task_id, system_message, user_message),
        append_format_instruction=(
            task.category is TaskCategory.OPEN_FEEDBACK and task.explicit_format_instruction
        ),
    )
