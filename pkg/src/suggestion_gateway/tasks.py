"""Suggestion task definitions and the task registry.

A task bundles the server-side prompt templates, the user-input contract,
and the structured-output schema for one use case. The registry holds the
built-in catalog plus any tasks loaded from a definition file, and rejects
structurally invalid tasks at registration time.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

from .errors import DuplicateTaskId, InvalidTask, RegistryFrozen, UnknownTask

PLACEHOLDER_RE = re.compile(r"\{([a-z_]+)\}")


class TaskCategory(str, Enum):
    CLOSED_RECOMMENDATION = "closed_recommendation"
    OPEN_FEEDBACK = "open_feedback"


class FieldKind(str, Enum):
    SHORT_TEXT = "short_text"
    LONG_TEXT = "long_text"
    STRING_LIST = "string_list"


@dataclass(frozen=True)
class FieldSpec:
    """One named user-input slot referenced by a prompt template."""

    name: str
    required: bool
    kind: FieldKind
    max_chars: int


@dataclass(frozen=True)
class SchemaProperty:
    """A property of the structured-output schema: plain text or a text array."""

    kind: str  # "text" | "text_array"
    description: str = ""


@dataclass(frozen=True)
class OutputSchema:
    """Function-calling contract sent to the provider.

    The parameter tree is a single object node; property kinds are limited
    to text and array-of-text, which is all the suggestion tasks need.
    """

    function_name: str
    description: str
    properties: dict[str, SchemaProperty]
    required: tuple[str, ...] = ()

    def to_json_schema(self) -> dict:
        """Render as a standard JSON-schema object node."""
        props: dict[str, dict] = {}
        for name, prop in self.properties.items():
            if prop.kind == "text_array":
                node: dict = {"type": "array", "items": {"type": "string"}}
            else:
                node = {"type": "string"}
            if prop.description:
                node["description"] = prop.description
            props[name] = node
        return {"type": "object", "properties": props, "required": list(self.required)}


@dataclass(frozen=True)
class ModelParams:
    temperature: float = 0.0
    max_output_tokens: int = 512
    model_name: str = "gpt-3.5-turbo"


@dataclass(frozen=True)
class SuggestionTask:
    """A named suggestion use case: templates, inputs, and output contract."""

    task_id: str
    title: str
    category: TaskCategory
    system_prompt_template: str
    user_prompt_template: str
    input_fields: tuple[FieldSpec, ...]
    output_schema: OutputSchema
    max_suggestions: int | None = None
    model_params: ModelParams = field(default_factory=ModelParams)
    # When true (open tasks), the provider layer appends a fixed sentence to
    # the outgoing system message asking for the structured function output.
    # Never applied to the stored template, which stays byte-stable.
    explicit_format_instruction: bool = True

    def placeholders(self) -> set[str]:
        """Names of every placeholder appearing in either template."""
        return set(PLACEHOLDER_RE.findall(self.system_prompt_template)) | set(
            PLACEHOLDER_RE.findall(self.user_prompt_template)
        )

    def field_map(self) -> dict[str, FieldSpec]:
        return {f.name: f for f in self.input_fields}

    def validate(self) -> list[str]:
        """Return the list of violated invariants (empty when well-formed)."""
        problems: list[str] = []
        if not self.task_id or not re.fullmatch(r"[a-z0-9][a-z0-9-]*", self.task_id):
            problems.append(f"task_id is not a slug: {self.task_id!r}")
        if not self.system_prompt_template.strip():
            problems.append("system_prompt_template is empty")

        fields = self.field_map()
        if len(fields) != len(self.input_fields):
            problems.append("duplicate input field names")
        for spec in self.input_fields:
            if not re.fullmatch(r"[a-z_]+", spec.name):
                problems.append(f"field name not [a-z_]+: {spec.name!r}")
            if spec.max_chars <= 0:
                problems.append(f"field {spec.name}: max_chars must be positive")

        bound = self.placeholders()
        for name in sorted(bound):
            if name not in fields:
                problems.append(f"unbound placeholder: {name}")
        for spec in self.input_fields:
            if spec.required and spec.name not in bound:
                problems.append(f"required field never referenced: {spec.name}")

        schema = self.output_schema
        unknown_required = set(schema.required) - set(schema.properties)
        if unknown_required:
            problems.append(
                "output schema requires undeclared properties: " + ", ".join(sorted(unknown_required))
            )

        if self.category is TaskCategory.CLOSED_RECOMMENDATION:
            if self.max_suggestions is None or not 1 <= self.max_suggestions <= 10:
                problems.append("closed task needs max_suggestions in 1..10")
            prop = schema.properties.get("suggestions")
            if prop is None or prop.kind != "text_array":
                problems.append("closed task schema needs an array-of-text property 'suggestions'")
        else:
            if self.max_suggestions is not None:
                problems.append("open task must not set max_suggestions")
            prop = schema.properties.get("feedback")
            if prop is None or prop.kind != "text":
                problems.append("open task schema needs a text property 'feedback'")
            elif tuple(schema.required) != ("feedback",):
                problems.append("open task schema must require exactly 'feedback'")

        params = self.model_params
        if not 0.0 <= params.temperature <= 2.0:
            problems.append("temperature outside [0, 2]")
        if params.max_output_tokens < 1:
            problems.append("max_output_tokens must be positive")
        return problems


class TaskRegistry:
    """Catalog of suggestion tasks.

    Built once at startup and frozen afterwards; reads need no coordination.
    """

    def __init__(self) -> None:
        self._tasks: dict[str, SuggestionTask] = {}
        self._frozen = False

    def register_task(self, task: SuggestionTask) -> None:
        if self._frozen:
            raise RegistryFrozen("registry is frozen; tasks register only during startup")
        problems = task.validate()
        if problems:
            raise InvalidTask(problems)
        if task.task_id in self._tasks:
            raise DuplicateTaskId(task.task_id)
        self._tasks[task.task_id] = task

    def get_task(self, task_id: str) -> SuggestionTask:
        try:
            return self._tasks[task_id]
        except KeyError:
            raise UnknownTask(task_id) from None

    def list_tasks(self) -> list[SuggestionTask]:
        return list(self._tasks.values())

    def __contains__(self, task_id: str) -> bool:
        return task_id in self._tasks

    def __len__(self) -> int:
        return len(self._tasks)

    def freeze(self) -> None:
        self._frozen = True

    def unbound_placeholders(self) -> list[tuple[str, str]]:
        """Registry-wide scan: (task_id, placeholder) pairs with no FieldSpec."""
        found = []
        for task in self._tasks.values():
            fields = task.field_map()
            for name in sorted(task.placeholders()):
                if name not in fields:
                    found.append((task.task_id, name))
        return found


def _field_from_json(node: dict) -> FieldSpec:
    return FieldSpec(
        name=node["name"],
        required=bool(node["required"]),
        kind=FieldKind(node["kind"]),
        max_chars=int(node["max_chars"]),
    )


def _schema_from_json(node: dict) -> OutputSchema:
    params = node.get("parameters", {})
    properties = {
        name: SchemaProperty(kind=prop["kind"], description=prop.get("description", ""))
        for name, prop in params.get("properties", {}).items()
    }
    return OutputSchema(
        function_name=node["function_name"],
        description=node.get("description", ""),
        properties=properties,
        required=tuple(params.get("required", ())),
    )


def task_from_json(node: dict) -> SuggestionTask:
    """Build a task from one entry of a task-definition file."""
    params = node.get("model_params", {})
    task = SuggestionTask(
        task_id=node["task_id"],
        title=node.get("title", node["task_id"]),
        category=TaskCategory(node["category"]),
        system_prompt_template=node["system_prompt_template"],
        user_prompt_template=node["user_prompt_template"],
        input_fields=tuple(_field_from_json(f) for f in node.get("input_fields", ())),
        output_schema=_schema_from_json(node["output_schema"]),
        max_suggestions=node.get("max_suggestions"),
        model_params=ModelParams(
            temperature=float(params.get("temperature", 0.0)),
            max_output_tokens=int(params.get("max_output_tokens", 512)),
            model_name=params.get("model_name", "gpt-3.5-turbo"),
        ),
    )
    if "explicit_format_instruction" in node:
        task = replace(task, explicit_format_instruction=bool(node["explicit_format_instruction"]))
    return task


def load_task_file(path: str | Path) -> list[SuggestionTask]:
    """Load a UTF-8 JSON task-definition file: an array of task objects."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, list):
        raise InvalidTask(["task file must contain a JSON array of task objects"])
    return [task_from_json(node) for node in data]
