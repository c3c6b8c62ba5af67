import json
import os
import tempfile
from typing import List, Optional


class ArtifactStore:
    """
    Minimal interface for reading and writing arena artifacts.
    Keys are logical, relative to the output root (e.g., "checkpoints/reach27/ckpt-250000.bin").
    """

    def read_text(self, key: str) -> str:
        raise NotImplementedError

    def write_text(self, key: str, text: str, content_type: Optional[str] = None) -> None:
        raise NotImplementedError

    def read_bytes(self, key: str) -> bytes:
        raise NotImplementedError

    def write_bytes(self, key: str, data: bytes, content_type: Optional[str] = None) -> None:
        raise NotImplementedError

    def exists(self, key: str) -> bool:
        raise NotImplementedError

    def list(self, prefix: str = "") -> List[str]:
        raise NotImplementedError

    def delete(self, key: str) -> None:
        """Removes key; a missing key is not an error."""
        raise NotImplementedError

    def list_dirs(self, prefix: str = "") -> List[str]:
        """Immediate child names under prefix that hold at least one artifact."""
        base = prefix.strip("/")
        children = set()
        for key in self.list(base):
            rest = key[len(base) + 1 :] if base else key
            if "/" in rest:
                children.add(rest.split("/", 1)[0])
        return sorted(children)

    def uri_for_key(self, key: str) -> str:
        raise NotImplementedError

    def append_text(self, key: str, text: str) -> None:
        existing = self.read_text(key) if self.exists(key) else ""
        if existing and not existing.endswith("\n"):
            existing += "\n"
        self.write_text(key, existing + text, content_type="application/json")

    def read_json(self, key: str) -> dict:
        return json.loads(self.read_text(key))

    def write_json(self, key: str, payload: dict) -> None:
        self.write_text(key, json.dumps(payload, indent=2, ensure_ascii=True, sort_keys=True) + "\n", content_type="application/json")

    def read_jsonl(self, key: str) -> List[dict]:
        return [json.loads(line) for line in self.read_text(key).splitlines() if line.strip()]

    def write_jsonl(self, key: str, records: List[dict]) -> None:
        lines = "".join(json.dumps(record, ensure_ascii=True, sort_keys=True) + "\n" for record in records)
        self.write_text(key, lines, content_type="application/json")


class LocalArtifactStore(ArtifactStore):
    def __init__(self, root_dir: str):
        self.root_dir = os.path.abspath(root_dir)

    def _path(self, key: str) -> str:
        normalized = key.lstrip("/").replace("/", os.sep)
        return os.path.join(self.root_dir, normalized)

    def _atomic_write(self, path: str, data: bytes) -> None:
        os.makedirs(os.path.dirname(path), exist_ok=True)
        fd, temp_path = tempfile.mkstemp(prefix=".tmp-", dir=os.path.dirname(path))
        try:
            with os.fdopen(fd, "wb") as handle:
                handle.write(data)
            os.replace(temp_path, path)
        except BaseException:
            if os.path.exists(temp_path):
                os.remove(temp_path)
            raise

    def read_text(self, key: str) -> str:
        with open(self._path(key), "r", encoding="utf-8") as handle:
            return handle.read()

    def write_text(self, key: str, text: str, content_type: Optional[str] = None) -> None:
        self._atomic_write(self._path(key), text.encode("utf-8"))

    def read_bytes(self, key: str) -> bytes:
        with open(self._path(key), "rb") as handle:
            return handle.read()

    def write_bytes(self, key: str, data: bytes, content_type: Optional[str] = None) -> None:
        self._atomic_write(self._path(key), data)

    def append_text(self, key: str, text: str) -> None:
        path = self._path(key)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        with open(path, "a", encoding="utf-8") as handle:
            handle.write(text)

    def exists(self, key: str) -> bool:
        return os.path.exists(self._path(key))

    def delete(self, key: str) -> None:
        path = self._path(key)
        if os.path.isfile(path):
            os.remove(path)

    def list(self, prefix: str = "") -> List[str]:
        prefix = prefix.lstrip("/").replace("\\", "/")
        keys: List[str] = []
        root = self._path(prefix)
        if not os.path.exists(root):
            return keys
        if os.path.isfile(root):
            return [prefix]
        for dirpath, _, filenames in os.walk(root):
            for filename in filenames:
                if filename.startswith(".tmp-"):
                    continue
                rel = os.path.relpath(os.path.join(dirpath, filename), self.root_dir)
                keys.append(rel.replace("\\", "/"))
        return sorted(keys)

    def uri_for_key(self, key: str) -> str:
        return f"file://{self._path(key)}"


class GCSArtifactStore(ArtifactStore):
    def __init__(self, bucket: str, prefix: str = "", client=None):
        try:
            from google.cloud import storage
        except Exception as exc:  # pragma: no cover - import guard
            raise ImportError("google-cloud-storage is required for gs:// output roots") from exc

        self.bucket_name = bucket
        self.prefix = prefix.strip("/")
        self.client = client or storage.Client()
        self.bucket = self.client.bucket(self.bucket_name)

    def _full_key(self, key: str) -> str:
        normalized = key.lstrip("/")
        return f"{self.prefix}/{normalized}" if self.prefix else normalized

    def _strip_prefix(self, full_key: str) -> str:
        if self.prefix and full_key.startswith(f"{self.prefix}/"):
            return full_key[len(self.prefix) + 1 :]
        return full_key

    def read_text(self, key: str) -> str:
        return self.bucket.blob(self._full_key(key)).download_as_text(encoding="utf-8")

    def write_text(self, key: str, text: str, content_type: Optional[str] = None) -> None:
        self.bucket.blob(self._full_key(key)).upload_from_string(text, content_type=content_type or "text/plain")

    def read_bytes(self, key: str) -> bytes:
        return self.bucket.blob(self._full_key(key)).download_as_bytes()

    def write_bytes(self, key: str, data: bytes, content_type: Optional[str] = None) -> None:
        # single-object uploads are atomic on GCS
        self.bucket.blob(self._full_key(key)).upload_from_string(data, content_type=content_type or "application/octet-stream")

    def exists(self, key: str) -> bool:
        return self.bucket.blob(self._full_key(key)).exists()

    def delete(self, key: str) -> None:
        blob = self.bucket.blob(self._full_key(key))
        if blob.exists():
            blob.delete()

    def list(self, prefix: str = "") -> List[str]:
        blobs = self.client.list_blobs(self.bucket, prefix=self._full_key(prefix))
        return sorted(self._strip_prefix(blob.name) for blob in blobs if not blob.name.endswith("/"))

    def uri_for_key(self, key: str) -> str:
        return f"gs://{self.bucket_name}/{self._full_key(key)}"


def is_gcs_uri(uri: str) -> bool:
    return uri.lower().startswith("gs://")


def parse_gcs_uri(uri: str) -> (str, str):
    normalized = uri[len("gs://") :]
    if "/" in normalized:
        bucket, prefix = normalized.split("/", 1)
    else:
        bucket, prefix = normalized, ""
    return bucket, prefix


def build_artifact_store(output_root: str) -> ArtifactStore:
    """
    Pick a store based on output_root. Supports local paths and gs://bucket/prefix.
    """
    if is_gcs_uri(output_root):
        bucket, prefix = parse_gcs_uri(output_root)
        return GCSArtifactStore(bucket=bucket, prefix=prefix)
    return LocalArtifactStore(output_root)
