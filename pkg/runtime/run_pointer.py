from typing import Optional

from runtime.artifact_store import ArtifactStore

RUNS_PREFIX = "runs"
LATEST_KEY = f"{RUNS_PREFIX}/latest_run.txt"


def run_prefix(run_id: str) -> str:
    return f"{RUNS_PREFIX}/{run_id}"


def write_latest(store: ArtifactStore, run_id: str) -> None:
    store.write_text(LATEST_KEY, run_id + "\n", content_type="text/plain")


def read_latest(store: ArtifactStore) -> Optional[str]:
    if store.exists(LATEST_KEY):
        try:
            return store.read_text(LATEST_KEY).strip() or None
        except OSError:
            return None
    return None


def get_latest_run_id(store: ArtifactStore) -> Optional[str]:
    latest = read_latest(store)
    if latest:
        return latest
    runs = store.list_dirs(RUNS_PREFIX)
    if not runs:
        return None
    # run ids are UTC-timestamp prefixed, so the last sorted is the newest
    return runs[-1]
