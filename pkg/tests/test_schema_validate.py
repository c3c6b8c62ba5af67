import pytest

from runtime.artifact_store import LocalArtifactStore
from runtime.schema_validate import SCHEMA_DIR, record_errors, validate_or_raise, validate_pipeline, validator_for


def test_all_schemas_compile():
    names = sorted(path.name for path in SCHEMA_DIR.glob("*.schema.json"))
    assert "match_record.schema.json" in names
    for name in names:
        validator_for(name)


def test_game_id_pattern_is_shared():
    good = {"type": "selection", "game_id": "reach27", "opponent_checkpoint": 64, "dominating_checkpoint": 128, "disparity": 0.9}
    assert record_errors("opponent_selection.schema.json", good) == []
    assert record_errors("opponent_selection.schema.json", dict(good, game_id="Reach 27"))
    assert record_errors("opponent_selection.schema.json", dict(good, disparity=0.5))


def test_game_meta_schema():
    meta = {"id": "reach27", "title": "Reach 27", "action_space_size": 9, "observation_dim": 2, "move_cap": 100, "stochastic_setup": False}
    assert record_errors("game_meta.schema.json", meta) == []
    assert record_errors("game_meta.schema.json", dict(meta, action_space_size=0))


def test_pipeline_validation(tmp_path):
    store = LocalArtifactStore(tmp_path)
    assert validate_pipeline(store) == ["pipeline/report.jsonl: missing"]

    store.write_jsonl(
        "pipeline/report.jsonl",
        [
            {"type": "filter", "game_id": "reach27", "stage": "keyword", "passed": True, "details": {}},
            {"type": "filter", "game_id": "reach27", "stage": "timeout", "passed": False, "details": {"exception_rate": 1.5}},
            {"type": "summary", "funnel": {"entered": 1}},
        ],
    )
    errors = validate_pipeline(store)
    assert len(errors) == 1
    assert errors[0].startswith("pipeline/report.jsonl line 2")
    with pytest.raises(ValueError, match="Schema validation failed"):
        validate_or_raise(errors)
    validate_or_raise([])
