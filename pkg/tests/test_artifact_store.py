import json

from runtime.artifact_store import (
    LocalArtifactStore,
    build_artifact_store,
    is_gcs_uri,
    parse_gcs_uri,
)
from runtime.run_pointer import LATEST_KEY, get_latest_run_id, write_latest
from runtime.shadow import append_shadow, write_run_status


def test_local_store_roundtrip(tmp_path):
    store = LocalArtifactStore(tmp_path)

    store.write_text("runs/r1/report.txt", "hello", content_type="text/plain")
    assert store.exists("runs/r1/report.txt")
    assert store.read_text("runs/r1/report.txt") == "hello"

    store.write_bytes("checkpoints/reach27/ckpt-64.bin", b"\x01\x02\x03")
    assert store.read_bytes("checkpoints/reach27/ckpt-64.bin") == b"\x01\x02\x03"

    keys = set(store.list(""))
    assert {"runs/r1/report.txt", "checkpoints/reach27/ckpt-64.bin"} <= keys
    assert store.list("checkpoints/isolation") == []
    assert store.uri_for_key("runs/r1/report.txt").startswith("file://")

    store.delete("runs/r1/report.txt")
    assert not store.exists("runs/r1/report.txt")
    store.delete("runs/r1/report.txt")


def test_jsonl_and_append(tmp_path):
    store = LocalArtifactStore(tmp_path)
    store.write_jsonl("runs/r1/matches.jsonl", [{"b": 2, "a": 1}, {"c": 3}])
    assert store.read_text("runs/r1/matches.jsonl") == '{"a": 1, "b": 2}\n{"c": 3}\n'
    assert store.read_jsonl("runs/r1/matches.jsonl") == [{"a": 1, "b": 2}, {"c": 3}]

    append_shadow(store, "runs/r1", "eval", "start")
    append_shadow(store, "runs/r1", "eval", "game evaluated", game_id="reach27", wins=3)
    events = store.read_jsonl("runs/r1/shadow.jsonl")
    assert [event["message"] for event in events] == ["start", "game evaluated"]
    assert events[1]["meta"] == {"game_id": "reach27", "wins": 3}
    assert "meta" not in events[0]

    write_run_status(store, "runs/r1", "failure", "boom", started_at="2026-01-01T00:00:00+00:00")
    status = json.loads(store.read_text("runs/r1/run_status.json"))
    assert (status["status"], status["message"]) == ("failure", "boom")


def test_latest_run_pointer(tmp_path):
    store = LocalArtifactStore(tmp_path)
    assert get_latest_run_id(store) is None

    store.write_text("runs/20260101-000000/matches.jsonl", "")
    store.write_text("runs/20260102-000000/matches.jsonl", "")
    assert store.list_dirs("runs") == ["20260101-000000", "20260102-000000"]
    assert get_latest_run_id(store) == "20260102-000000"

    write_latest(store, "20260101-000000")
    assert store.read_text(LATEST_KEY) == "20260101-000000\n"
    assert get_latest_run_id(store) == "20260101-000000"


def test_build_artifact_store_local(tmp_path):
    store = build_artifact_store(str(tmp_path))
    assert isinstance(store, LocalArtifactStore)


def test_gcs_uri_parsing():
    assert is_gcs_uri("gs://arena-bucket/suite/runs")
    bucket, prefix = parse_gcs_uri("gs://arena-bucket/suite/runs")
    assert bucket == "arena-bucket"
    assert prefix == "suite/runs"
    assert not is_gcs_uri("/tmp/arena")
