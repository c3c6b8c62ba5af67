import json
from datetime import datetime, timezone
from typing import Optional

from runtime.artifact_store import ArtifactStore


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def run_timestamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y%m%d-%H%M%S")


def append_shadow(store: ArtifactStore, prefix: str, stage: str, message: str, **meta) -> None:
    """Append one structured event to <prefix>/shadow.jsonl."""
    event = {"ts": utc_now_iso(), "stage": stage, "message": message}
    if meta:
        event["meta"] = meta
    store.append_text(f"{prefix}/shadow.jsonl", json.dumps(event, ensure_ascii=True, default=str) + "\n")


def write_run_status(store: ArtifactStore, prefix: str, status: str, message: str, started_at: Optional[str] = None) -> None:
    payload = {
        "status": status,
        "message": message,
        "started_at": started_at,
        "finished_at": utc_now_iso(),
    }
    store.write_json(f"{prefix}/run_status.json", payload)
