"""Built-in suggestion task catalog.

The prompt wording below is frozen product data: golden tests pin every
byte, typos included. Do not edit the strings.
"""

from __future__ import annotations

from .tasks import (
    FieldKind,
    FieldSpec,
    ModelParams,
    OutputSchema,
    SchemaProperty,
    SuggestionTask,
    TaskCategory,
    TaskRegistry,
)

MAX_CLOSED_SUGGESTIONS = 5

# Shared output contracts: closed tasks return a list of labels, open tasks
# a single feedback paragraph.
CLOSED_SCHEMA = OutputSchema(
    function_name="return_suggestions",
    description="Return the recommended values as a list of short labels.",
    properties={"suggestions": SchemaProperty(kind="text_array", description="Recommended values, best first.")},
    required=("suggestions",),
)

OPEN_SCHEMA = OutputSchema(
    function_name="return_feedback",
    description="Return advisory feedback for the user as plain text.",
    properties={"feedback": SchemaProperty(kind="text", description="Feedback paragraph for the user.")},
    required=("feedback",),
)

_DEFAULT_PARAMS = ModelParams(temperature=0.0, max_output_tokens=512)


def _related_objects_system(predicate: str) -> str:
    # The predicate name is substituted once, when the catalog is built; the
    # surrounding wording is shared by all three variants.
    return (
        f"A {predicate} contains a maximum of approximately 4 words to explain the "
        "research task or topic of a paper. Provide a list of maximum 5 research "
        "problems based on the title and optionally abstract provided by the user."
    )


def _related_objects_task(predicate: str) -> SuggestionTask:
    slug = predicate.replace(" ", "-")
    return SuggestionTask(
        task_id=f"related-objects-{slug}",
        title=f"Related Objects: {predicate.title()}",
        category=TaskCategory.CLOSED_RECOMMENDATION,
        system_prompt_template=_related_objects_system(predicate),
        user_prompt_template="{title}\n{abstract}",
        input_fields=(
            FieldSpec("title", required=True, kind=FieldKind.SHORT_TEXT, max_chars=500),
            FieldSpec("abstract", required=False, kind=FieldKind.LONG_TEXT, max_chars=10_000),
        ),
        output_schema=CLOSED_SCHEMA,
        max_suggestions=MAX_CLOSED_SUGGESTIONS,
        model_params=_DEFAULT_PARAMS,
        explicit_format_instruction=False,
    )


def builtin_tasks() -> list[SuggestionTask]:
    """The eight built-in tasks: four closed recommendations, four open feedback."""
    tasks = [
        SuggestionTask(
            task_id="related-predicates",
            title="Related Predicates",
            category=TaskCategory.CLOSED_RECOMMENDATION,
            system_prompt_template=(
                "You are an assistant for building a knowledge graph for science. "
                "Your task is to recommend additional related predicates based on the "
                "set of existing predicates. Recommend a list maximum 5 additional predicates."
            ),
            user_prompt_template="The existing predicates are: {predicates}",
            input_fields=(
                FieldSpec("predicates", required=True, kind=FieldKind.STRING_LIST, max_chars=10_000),
            ),
            output_schema=CLOSED_SCHEMA,
            max_suggestions=MAX_CLOSED_SUGGESTIONS,
            model_params=_DEFAULT_PARAMS,
            explicit_format_instruction=False,
        ),
        _related_objects_task("research problem"),
        _related_objects_task("method"),
        _related_objects_task("approach"),
        SuggestionTask(
            task_id="literal-applicability",
            title="Literal Applicability",
            category=TaskCategory.OPEN_FEEDBACK,
            system_prompt_template=(
                "You are an assistant in building a knowledge graph for science. "
                "You task is to advice users whether they should use a RDF resource or "
                "RDF literal. Based on a user-provided label, advice whether the type "
                "should be 'literal' or 'resource'. Literals are generally larger pieces "
                "of text and are not reusable, resource are atomic and can be reused."
            ),
            user_prompt_template="{label}",
            input_fields=(
                FieldSpec("label", required=True, kind=FieldKind.LONG_TEXT, max_chars=10_000),
            ),
            output_schema=OPEN_SCHEMA,
            model_params=_DEFAULT_PARAMS,
        ),
        SuggestionTask(
            task_id="decomposable-resources",
            title="Decomposable Resources",
            category=TaskCategory.OPEN_FEEDBACK,
            system_prompt_template=(
                "You are an assistant for building a knowledge graph for science. "
                "Provide advice on if and how to decompose a provided resource label "
                "into separate resources. Only provide feedback is decomposing makes sense."
            ),
            user_prompt_template="{label}",
            input_fields=(
                FieldSpec("label", required=True, kind=FieldKind.LONG_TEXT, max_chars=10_000),
            ),
            output_schema=OPEN_SCHEMA,
            model_params=_DEFAULT_PARAMS,
        ),
        SuggestionTask(
            task_id="predicate-reusability",
            title="Predicate Reusability",
            category=TaskCategory.OPEN_FEEDBACK,
            system_prompt_template=(
                "You are an assistant in building a knowledge graph for science. "
                "Provide feedback whether the provided predicate label is generic enough "
                "to make it reusable in the graph and explain how to make it more generic. "
                "Examples of properties that are not reusable: population in Berlin "
                "(because it contains a location), temperature in degrees Celsius "
                "(because it contains a unit)."
            ),
            user_prompt_template="{label}",
            input_fields=(
                FieldSpec("label", required=True, kind=FieldKind.SHORT_TEXT, max_chars=500),
            ),
            output_schema=OPEN_SCHEMA,
            model_params=_DEFAULT_PARAMS,
        ),
        SuggestionTask(
            task_id="comparison-descriptiveness",
            title="Comparison Descriptiveness",
            category=TaskCategory.OPEN_FEEDBACK,
            system_prompt_template=(
                "Provide feedback to a user on how to improve a provided description text. "
                "The description text should give information about the objectives and "
                "topics of a scientific tabular related work overview."
            ),
            user_prompt_template="{description}",
            input_fields=(
                FieldSpec("description", required=True, kind=FieldKind.LONG_TEXT, max_chars=10_000),
            ),
            output_schema=OPEN_SCHEMA,
            model_params=_DEFAULT_PARAMS,
        ),
    ]
    return tasks


def build_registry(task_file: str | None = None) -> TaskRegistry:
    """Registry with the built-in catalog plus an optional task-definition file."""
    from .tasks import load_task_file

    registry = TaskRegistry()
    for task in builtin_tasks():
        registry.register_task(task)
    if task_file:
        for task in load_task_file(task_file):
            registry.register_task(task)
    registry.freeze()
    return registry
