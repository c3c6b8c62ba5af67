"""
Binary checkpoint format.

    GGCKPT1\n
    {"game_id": ..., "hidden": [64, 64], "n_actions": ..., "obs_dim": ..., "seed": ..., "timestep": ...}\n
    little-endian float32 tensors in PARAM_ORDER (w1, b1, w2, b2, wp, bp, wv, bv), row-major
"""
import json
import re
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from rl.network import HIDDEN, PARAM_ORDER, PolicyParams
from runtime.artifact_store import ArtifactStore

MAGIC = b"GGCKPT1\n"
CHECKPOINT_PREFIX = "checkpoints"
_LE_FLOAT32 = np.dtype("<f4")
_CKPT_NAME = re.compile(r"ckpt-(\d+)\.bin$")


class CheckpointError(ValueError):
    pass


@dataclass(frozen=True)
class CheckpointHeader:
    game_id: str
    obs_dim: int
    n_actions: int
    timestep: int
    seed: int
    hidden: Tuple[int, int] = HIDDEN

    def to_json(self) -> str:
        payload = {
            "game_id": self.game_id,
            "obs_dim": self.obs_dim,
            "n_actions": self.n_actions,
            "hidden": list(self.hidden),
            "timestep": self.timestep,
            "seed": self.seed,
        }
        return json.dumps(payload, sort_keys=True)


def encode_checkpoint(params: PolicyParams, header: CheckpointHeader) -> bytes:
    if (params.obs_dim, params.n_actions) != (header.obs_dim, header.n_actions):
        raise CheckpointError(
            f"header dims ({header.obs_dim}, {header.n_actions}) do not match params ({params.obs_dim}, {params.n_actions})"
        )
    chunks = [MAGIC, header.to_json().encode("utf-8"), b"\n"]
    for _, tensor in params.items():
        chunks.append(np.ascontiguousarray(tensor, dtype=_LE_FLOAT32).tobytes())
    return b"".join(chunks)


def _parse_header(line: bytes) -> CheckpointHeader:
    try:
        raw = json.loads(line.decode("utf-8"))
        header = CheckpointHeader(
            game_id=str(raw["game_id"]),
            obs_dim=int(raw["obs_dim"]),
            n_actions=int(raw["n_actions"]),
            timestep=int(raw["timestep"]),
            seed=int(raw["seed"]),
            hidden=tuple(int(size) for size in raw["hidden"]),
        )
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"malformed checkpoint header: {exc}") from exc
    if header.hidden != HIDDEN:
        raise CheckpointError(f"unsupported hidden layout {list(header.hidden)}; expected {list(HIDDEN)}")
    return header


def decode_checkpoint(blob: bytes) -> Tuple[PolicyParams, CheckpointHeader]:
    if not blob.startswith(MAGIC):
        raise CheckpointError("not a checkpoint file (bad magic)")
    newline = blob.find(b"\n", len(MAGIC))
    if newline < 0:
        raise CheckpointError("checkpoint header is not terminated")
    header = _parse_header(blob[len(MAGIC):newline])
    body = memoryview(blob)[newline + 1:]
    shapes = PolicyParams.shapes(header.obs_dim, header.n_actions)
    expected = sum(int(np.prod(shape)) for shape in shapes.values()) * _LE_FLOAT32.itemsize
    if len(body) != expected:
        raise CheckpointError(f"checkpoint body has {len(body)} bytes; expected {expected}")
    tensors = {}
    offset = 0
    for name in PARAM_ORDER:
        shape = shapes[name]
        count = int(np.prod(shape))
        flat = np.frombuffer(body, dtype=_LE_FLOAT32, count=count, offset=offset)
        tensors[name] = flat.astype(np.float32).reshape(shape)
        offset += count * _LE_FLOAT32.itemsize
    params = PolicyParams(**tensors)
    if not params.is_finite():
        raise CheckpointError("checkpoint contains non-finite weights")
    return params, header


def checkpoint_key(game_id: str, timestep: int) -> str:
    return f"{CHECKPOINT_PREFIX}/{game_id}/ckpt-{timestep}.bin"


def save_checkpoint(store: ArtifactStore, params: PolicyParams, header: CheckpointHeader) -> str:
    key = checkpoint_key(header.game_id, header.timestep)
    store.write_bytes(key, encode_checkpoint(params, header))
    return key


def load_checkpoint(store: ArtifactStore, key: str) -> Tuple[PolicyParams, CheckpointHeader]:
    if not store.exists(key):
        raise CheckpointError(f"checkpoint not found: {store.uri_for_key(key)}")
    return decode_checkpoint(store.read_bytes(key))


def list_checkpoints(store: ArtifactStore, game_id: str) -> List[Tuple[int, str]]:
    """(timestep, key) pairs for a game's checkpoints, oldest first."""
    found = []
    for key in store.list(f"{CHECKPOINT_PREFIX}/{game_id}"):
        match = _CKPT_NAME.search(key)
        if match:
            found.append((int(match.group(1)), key))
    return sorted(found)


def load_checkpoint_file(path: str) -> Tuple[PolicyParams, CheckpointHeader]:
    """Read a checkpoint from a plain path (agent specs such as ``mcts:<path>``)."""
    try:
        with open(path, "rb") as handle:
            blob = handle.read()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    return decode_checkpoint(blob)
