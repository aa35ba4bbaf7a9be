"""Command-line interface: the stability probe and a dev server runner.

Exit codes: 0 on a completed probe run (whatever the measured agreement),
2 on usage errors, 3 on configuration errors such as a missing API key.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from .catalog import build_registry
from .errors import GatewayError
from .providers import HttpChatProvider, MockProvider, echo_mock
from .service import Settings, create_app
from .stability import StabilityReport, run_probe
from .tasks import FieldKind

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sgw", description="Suggestion gateway tools")
    sub = parser.add_subparsers(dest="command", required=True)

    probe = sub.add_parser("probe", help="measure response stability for one task")
    probe.add_argument("--task", required=True, help="task id, e.g. related-predicates")
    probe.add_argument(
        "--input",
        action="append",
        default=[],
        metavar="K=V",
        help="task input as name=value; repeatable; list fields split on commas",
    )
    probe.add_argument("--n", type=int, default=10, help="number of identical calls (>= 2)")
    probe.add_argument("--provider", choices=("mock", "live"), default="mock")
    probe.add_argument("--temperature", type=float, default=None)
    probe.add_argument("--report", choices=("text", "json"), default="text")
    probe.add_argument("--out", default=".", help="directory for the transcript file")

    serve = sub.add_parser("serve", help="run the HTTP gateway")
    serve.add_argument("--port", type=int, default=None, help="override SG_PORT")
    return parser


def _parse_inputs(pairs: list[str], task, parser: argparse.ArgumentParser) -> dict:
    fields = task.field_map()
    inputs: dict[str, object] = {}
    for pair in pairs:
        if "=" not in pair:
            parser.error(f"--input expects name=value, got {pair!r}")
        name, value = pair.split("=", 1)
        spec = fields.get(name)
        if spec is not None and spec.kind is FieldKind.STRING_LIST:
            inputs[name] = [part.strip() for part in value.split(",") if part.strip()]
        else:
            inputs[name] = value
    return inputs


def _format_text(report: StabilityReport) -> str:
    lines = [
        f"task                    {report.task_id}",
        f"runs                    {report.n}",
        f"parsed                  {report.parse_success_count}/{report.n}",
        f"distinct responses      {report.distinct_normalized_responses}",
        f"agreement               {report.agreement:.3f}" + ("  (all runs failed)" if report.all_failed else ""),
        f"suggestion overlap      {'n/a' if report.per_item_overlap is None else f'{report.per_item_overlap:.3f}'}",
        f"latency p50/p95 (ms)    {report.latency_p50_ms}/{report.latency_p95_ms}",
        f"transcript              {report.transcript_path}",
    ]
    return "\n".join(lines)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == "serve":
        import uvicorn

        settings = Settings.from_env()
        if args.port is not None:
            settings.port = args.port
        uvicorn.run(create_app(settings), host="0.0.0.0", port=settings.port)
        return EXIT_OK

    # probe
    registry = build_registry(os.environ.get("SG_TASK_FILE"))
    try:
        task = registry.get_task(args.task)
    except GatewayError:
        parser.error(f"unknown task: {args.task}")
    if args.n < 2:
        parser.error("--n must be >= 2")

    if args.provider == "live":
        settings = Settings.from_env()
        if not os.environ.get(settings.provider.api_key_ref):
            print(
                f"config error: {settings.provider.api_key_ref} is not set",
                file=sys.stderr,
            )
            return EXIT_CONFIG
        provider = HttpChatProvider(settings.provider)
    else:
        provider = MockProvider(default=echo_mock)

    inputs = _parse_inputs(args.input, task, parser)
    try:
        report = run_probe(
            registry,
            args.task,
            inputs,
            args.n,
            provider,
            temperature=args.temperature,
            out_dir=args.out,
        )
    except GatewayError as exc:
        parser.error(str(exc))

    if args.report == "json":
        print(json.dumps(report.to_json_dict(), indent=2))
    else:
        print(_format_text(report))
    return EXIT_OK


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
