import json
import os
from pathlib import Path
from typing import Dict, Iterable, List

from jsonschema import Draft202012Validator, RefResolver

from runtime.artifact_store import ArtifactStore

SCHEMA_DIR = Path(__file__).resolve().parent.parent / "schemas"
SCHEMA_STORE: Dict[str, dict] = {}
_VALIDATORS: Dict[str, Draft202012Validator] = {}

PIPELINE_SCHEMAS = {
    "filter": "filter_report.schema.json",
    "selection": "opponent_selection.schema.json",
}


def _load_schema_store() -> None:
    if SCHEMA_STORE:
        return
    for path in SCHEMA_DIR.glob("*.schema.json"):
        schema = json.loads(path.read_text(encoding="utf-8"))
        schema_id = schema.get("$id")
        if schema_id:
            SCHEMA_STORE[schema_id] = schema
        SCHEMA_STORE[path.name] = schema


def validator_for(schema_name: str) -> Draft202012Validator:
    _load_schema_store()
    if schema_name in _VALIDATORS:
        return _VALIDATORS[schema_name]
    schema = SCHEMA_STORE.get(schema_name)
    if schema is None:
        raise FileNotFoundError(f"Schema {schema_name} not found in {SCHEMA_DIR}")
    base_uri = f"{SCHEMA_DIR.as_uri()}/"
    resolver = RefResolver(base_uri=base_uri, referrer=schema, store=SCHEMA_STORE)
    Draft202012Validator.check_schema(schema)
    validator = Draft202012Validator(schema, resolver=resolver)
    _VALIDATORS[schema_name] = validator
    return validator


def record_errors(schema_name: str, payload: dict) -> List[str]:
    validator = validator_for(schema_name)
    return [error.message for error in sorted(validator.iter_errors(payload), key=lambda err: list(err.path))]


def _validate_lines(records: Iterable[dict], schema_for, label: str) -> List[str]:
    errors: List[str] = []
    for lineno, record in enumerate(records, start=1):
        schema_name = schema_for(record)
        if schema_name is None:
            continue
        try:
            validator_for(schema_name).validate(record)
        except Exception as exc:  # noqa: BLE001 - bubble user-facing error text
            errors.append(f"{label} line {lineno}: {getattr(exc, 'message', exc)}")
    return errors


def validate_run(store: ArtifactStore, prefix: str) -> List[str]:
    """Validate an evaluation run directory (matches.jsonl + report.jsonl)."""
    errors: List[str] = []
    matches_key = f"{prefix}/matches.jsonl"
    report_key = f"{prefix}/report.jsonl"
    if store.exists(matches_key):
        errors.extend(_validate_lines(store.read_jsonl(matches_key), lambda _: "match_record.schema.json", matches_key))
    if store.exists(report_key):
        errors.extend(_validate_lines(store.read_jsonl(report_key), lambda _: "eval_report.schema.json", report_key))
    return errors


def validate_pipeline(store: ArtifactStore, prefix: str = "pipeline") -> List[str]:
    report_key = f"{prefix}/report.jsonl"
    if not store.exists(report_key):
        return [f"{report_key}: missing"]
    errors = _validate_lines(store.read_jsonl(report_key), lambda record: PIPELINE_SCHEMAS.get(record.get("type")), report_key)
    for key in store.list(f"{prefix}/opponents"):
        if key.endswith(".json"):
            errors.extend(_validate_lines([store.read_json(key)], lambda _: "opponent_selection.schema.json", key))
    return errors


def validate_or_raise(errors: List[str]) -> None:
    if errors:
        raise ValueError("Schema validation failed: " + "; ".join(errors))


def schema_dir() -> str:
    return os.fspath(SCHEMA_DIR)


def main() -> None:
    import argparse

    from runtime.artifact_store import build_artifact_store
    from runtime.config import default_output_dir
    from runtime.run_pointer import get_latest_run_id, run_prefix

    parser = argparse.ArgumentParser(description="Validate arena artifacts against schemas.")
    parser.add_argument("--run-id", help="Evaluation run to validate (default: latest).")
    parser.add_argument("--pipeline", action="store_true", help="Validate pipeline/report.jsonl instead.")
    parser.add_argument("--out", default=default_output_dir(), help="Output root (local path or gs://).")
    args = parser.parse_args()
    store = build_artifact_store(args.out)
    if args.pipeline:
        validate_or_raise(validate_pipeline(store))
        print("Validation passed for pipeline report")
        return
    run_id = args.run_id or get_latest_run_id(store)
    if not run_id:
        raise SystemExit("no evaluation runs found")
    validate_or_raise(validate_run(store, run_prefix(run_id)))
    print(f"Validation passed for run {run_id}")


if __name__ == "__main__":
    main()
