import json

import numpy as np
import pytest

from rl.checkpoint import (
    MAGIC,
    CheckpointError,
    CheckpointHeader,
    checkpoint_key,
    decode_checkpoint,
    encode_checkpoint,
    list_checkpoints,
    load_checkpoint,
    load_checkpoint_file,
    save_checkpoint,
)
from rl.network import PolicyParams
from runtime.artifact_store import LocalArtifactStore


def sample(obs_dim=2, n_actions=9, timestep=64):
    params = PolicyParams.init(obs_dim, n_actions, np.random.default_rng(timestep))
    header = CheckpointHeader(game_id="reach27", obs_dim=obs_dim, n_actions=n_actions, timestep=timestep, seed=7)
    return params, header


def test_layout_and_exact_decode():
    params, header = sample()
    blob = encode_checkpoint(params, header)
    assert blob.startswith(MAGIC)
    header_line = blob[len(MAGIC):blob.index(b"\n", len(MAGIC))]
    assert json.loads(header_line) == {"game_id": "reach27", "obs_dim": 2, "n_actions": 9, "hidden": [64, 64], "timestep": 64, "seed": 7}
    n_floats = 2 * 64 + 64 + 64 * 64 + 64 + 64 * 9 + 9 + 64 + 1
    assert len(blob) == len(MAGIC) + len(header_line) + 1 + 4 * n_floats
    first = np.frombuffer(blob, dtype="<f4", count=1, offset=len(MAGIC) + len(header_line) + 1)[0]
    assert first == params.w1[0, 0]

    decoded, decoded_header = decode_checkpoint(blob)
    assert decoded_header == header
    for (name, left), (_, right) in zip(params.items(), decoded.items()):
        assert left.tobytes() == right.tobytes(), name


def test_rejects_damaged_files():
    params, header = sample()
    blob = encode_checkpoint(params, header)
    with pytest.raises(CheckpointError, match="magic"):
        decode_checkpoint(b"NOTCKPT\n" + blob[len(MAGIC):])
    with pytest.raises(CheckpointError, match="bytes"):
        decode_checkpoint(blob[:-4])
    with pytest.raises(CheckpointError, match="header"):
        decode_checkpoint(MAGIC + b"{not json}\n")
    with pytest.raises(CheckpointError, match="hidden"):
        decode_checkpoint(blob.replace(b"[64, 64]", b"[32, 32]", 1))


def test_rejects_non_finite_weights():
    params, header = sample()
    params.bv[0] = np.inf
    with pytest.raises(CheckpointError, match="non-finite"):
        decode_checkpoint(encode_checkpoint(params, header))


def test_header_must_match_params():
    params, _ = sample()
    wrong = CheckpointHeader(game_id="reach27", obs_dim=3, n_actions=9, timestep=1, seed=0)
    with pytest.raises(CheckpointError):
        encode_checkpoint(params, wrong)


def test_store_roundtrip_and_listing(tmp_path):
    store = LocalArtifactStore(tmp_path)
    for timestep in (128, 64, 192):
        params, header = sample(timestep=timestep)
        assert save_checkpoint(store, params, header) == checkpoint_key("reach27", timestep)
    store.write_text("checkpoints/reach27/training.jsonl", "{}\n")

    listed = list_checkpoints(store, "reach27")
    assert [timestep for timestep, _ in listed] == [64, 128, 192]
    assert list_checkpoints(store, "isolation") == []

    params, header = load_checkpoint(store, listed[0][1])
    assert header.timestep == 64
    assert load_checkpoint_file(str(tmp_path / "checkpoints" / "reach27" / "ckpt-64.bin"))[1] == header

    with pytest.raises(CheckpointError, match="not found"):
        load_checkpoint(store, checkpoint_key("reach27", 999))
    with pytest.raises(CheckpointError, match="cannot read"):
        load_checkpoint_file(str(tmp_path / "missing.bin"))
