import numpy as np
import pytest

from engine.core_env import ContractError
from engine.games.reach27 import Reach27
from rl.checkpoint import list_checkpoints, load_checkpoint
from rl.network import PolicyParams
from rl.ppo import PPOConfig
from rl.selfplay import CheckpointPool, TrainingSchedule, epsilon_at, sample_opponent, train, train_game
from runtime.artifact_store import LocalArtifactStore
from runtime.rng import SplitMix64
from tests.fixtures.broken_games import NeverEnding

TINY_PPO = PPOConfig(rollout_length=64, batch_size=32, epochs_per_update=2)
TINY_SCHEDULE = TrainingSchedule(total_timesteps=256, checkpoint_interval=64)


def test_epsilon_schedule_is_linear():
    schedule = TrainingSchedule()
    assert epsilon_at(0, schedule) == 1.0
    assert epsilon_at(1_000_000, schedule) == pytest.approx(0.1)
    assert epsilon_at(500_000, schedule) == pytest.approx(0.55)
    with pytest.raises(ContractError):
        epsilon_at(1_000_001, schedule)


def test_schedule_arithmetic():
    desk = TrainingSchedule(total_timesteps=40_000, checkpoint_interval=10_000)
    assert desk.n_checkpoints == 4
    assert desk.checkpoint_timesteps() == [10_000, 20_000, 30_000, 40_000]
    with pytest.raises(ContractError):
        TrainingSchedule(total_timesteps=1_000, checkpoint_interval=300)


def test_pool_keeps_timesteps_increasing():
    pool = CheckpointPool()
    params = PolicyParams.zeros(2, 9)
    pool.add(10, params)
    pool.add(20, params)
    assert pool.timesteps() == [10, 20]
    with pytest.raises(ContractError):
        pool.add(20, params)
    with pytest.raises(ContractError):
        CheckpointPool().latest()


def test_pool_stores_copies():
    params = PolicyParams.zeros(2, 9)
    pool = CheckpointPool()
    pool.add(1, params)
    params.bp[:] = 1.0
    assert not np.any(pool.latest().params.bp)


def test_random_opponent_during_first_interval():
    pool = CheckpointPool()
    opponent = sample_opponent(pool, 10_000, SplitMix64(0), 250_000)
    assert opponent.is_random


def test_checkpoint_is_eligible_at_its_own_timestep():
    pool = CheckpointPool()
    pool.add(250_000, PolicyParams.zeros(2, 9))
    opponent = sample_opponent(pool, 250_000, SplitMix64(0), 250_000)
    assert opponent.timestep == 250_000
    assert not opponent.is_random


def test_pool_draws_are_uniform():
    pool = CheckpointPool()
    pool.add(250_000, PolicyParams.zeros(2, 9))
    pool.add(500_000, PolicyParams.zeros(2, 9))
    rng = SplitMix64(1)
    early = sum(1 for _ in range(10_000) if sample_opponent(pool, 600_000, rng, 250_000).timestep == 250_000)
    assert abs(early - 5_000) < 200


def test_train_emits_one_checkpoint_per_interval():
    seen = []
    updates = []
    run = train(Reach27, TINY_SCHEDULE, TINY_PPO, seed=3, on_checkpoint=lambda t, _: seen.append(t), on_update=updates.append)
    assert seen == [64, 128, 192, 256]
    assert run.pool.timesteps() == seen
    assert [record["timestep"] for record in updates] == [64, 128, 192, 256]
    assert run.stats.episodes > 0
    assert run.stats.wins + run.stats.losses + run.stats.draws == run.stats.episodes
    assert run.params.is_finite()


def test_training_is_deterministic():
    first = train(Reach27, TINY_SCHEDULE, TINY_PPO, seed=11)
    second = train(Reach27, TINY_SCHEDULE, TINY_PPO, seed=11)
    for a, b in zip(first.pool, second.pool):
        for (name, left), (_, right) in zip(a.params.items(), b.params.items()):
            assert left.tobytes() == right.tobytes(), name
    assert first.stats.as_dict() == second.stats.as_dict()
    assert first.progress == second.progress

    other = train(Reach27, TINY_SCHEDULE, TINY_PPO, seed=12)
    assert other.params.w1.tobytes() != first.params.w1.tobytes()


def test_capped_games_are_draws_and_flag_the_game():
    schedule = TrainingSchedule(total_timesteps=64, checkpoint_interval=64)
    run = train(NeverEnding, schedule, TINY_PPO, seed=0, move_cap=6)
    assert run.stats.episodes > 0
    assert run.stats.truncations == run.stats.episodes
    assert run.stats.draws == run.stats.episodes
    assert run.stats.flagged


def test_train_game_persists_checkpoints(tmp_path):
    store = LocalArtifactStore(tmp_path)
    run, keys = train_game(store, Reach27, TINY_SCHEDULE, TINY_PPO, seed=5, config_text="seed = 5\n")
    assert keys == [f"checkpoints/reach27/ckpt-{t}.bin" for t in (64, 128, 192, 256)]
    assert [t for t, _ in list_checkpoints(store, "reach27")] == [64, 128, 192, 256]

    params, header = load_checkpoint(store, keys[-1])
    assert (header.game_id, header.timestep, header.seed) == ("reach27", 256, 5)
    assert params.w1.tobytes() == run.params.w1.tobytes()

    log = store.read_jsonl("checkpoints/reach27/training.jsonl")
    assert [record["type"] for record in log] == ["update"] * 4 + ["stats"]
    assert log[-1]["episodes"] == run.stats.episodes
    assert store.read_text("checkpoints/reach27/config.txt") == "seed = 5\n"
