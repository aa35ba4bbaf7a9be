from __future__ import annotations

import json

import pytest

from suggestion_gateway.cli import EXIT_CONFIG, EXIT_OK, main


def test_probe_json_report_on_stdout(tmp_path, capsys):
    code = main(
        [
            "probe",
            "--task",
            "related-predicates",
            "--input",
            "predicates=a,b",
            "--n",
            "5",
            "--provider",
            "mock",
            "--report",
            "json",
            "--out",
            str(tmp_path),
        ]
    )
    assert code == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["n"] == 5
    assert report["task_id"] == "related-predicates"
    assert report["agreement"] == 1.0  # default mock answer is fixed


def test_probe_text_report(tmp_path, capsys):
    code = main(
        [
            "probe",
            "--task",
            "comparison-descriptiveness",
            "--input",
            "description=A comparison of models",
            "--n",
            "3",
            "--out",
            str(tmp_path),
        ]
    )
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "agreement" in out
    assert "transcript" in out


def test_comma_splitting_only_for_list_fields(tmp_path, capsys):
    code = main(
        [
            "probe",
            "--task",
            "literal-applicability",
            "--input",
            "label=one, two, three",  # single text field: commas preserved
            "--n",
            "2",
            "--report",
            "json",
            "--out",
            str(tmp_path),
        ]
    )
    assert code == EXIT_OK


def test_missing_task_flag_is_usage_error():
    with pytest.raises(SystemExit) as excinfo:
        main(["probe", "--n", "5"])
    assert excinfo.value.code == 2


def test_unknown_task_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as excinfo:
        main(["probe", "--task", "nope", "--out", str(tmp_path)])
    assert excinfo.value.code == 2


def test_invalid_inputs_are_usage_error(tmp_path):
    with pytest.raises(SystemExit) as excinfo:
        main(["probe", "--task", "related-predicates", "--out", str(tmp_path)])
    assert excinfo.value.code == 2


def test_live_provider_without_key_is_config_error(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("SG_LLM_API_KEY", raising=False)
    code = main(
        [
            "probe",
            "--task",
            "related-predicates",
            "--input",
            "predicates=a",
            "--provider",
            "live",
            "--out",
            str(tmp_path),
        ]
    )
    assert code == EXIT_CONFIG
    assert "SG_LLM_API_KEY" in capsys.readouterr().err
