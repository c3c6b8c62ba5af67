import numpy as np
import pytest

from engine.core_env import wrap_move_cap
from engine.games import REGISTRY
from engine.suite import load_suite
from runtime.rng import SplitMix64, derive_seed

SMOKE_EPISODES = 300
FULL_EPISODES = 10_000


def fuzz_random_play(game_id, episodes):
    """Plays uniformly random legal moves and checks the contract at every step; returns the moves seen."""
    spec = load_suite().spec(game_id)
    rng = SplitMix64(derive_seed(2024, len(game_id)))
    seen = set()
    for episode in range(episodes):
        env = wrap_move_cap(REGISTRY[game_id](spec), spec.move_cap)
        obs, _ = env.reset(seed=derive_seed(1, episode))
        assert obs.shape == (spec.observation_dim,)
        while not env.done:
            valid = env.valid_moves()
            assert valid, "non-terminal state without a legal move"
            seen.update(valid)
            outcome = env.step(rng.choice(valid))
            assert not outcome.info["invalid_action"]
            assert not (outcome.terminated and outcome.truncated)
            assert outcome.reward in (1.0, -1.0, 0.0)
            assert outcome.observation.shape == (spec.observation_dim,)
            assert np.all(np.isfinite(outcome.observation))
        assert not env.truncated, f"{game_id} reached the move cap under random play"
        assert env.render().strip()
    assert seen <= set(range(spec.action_space_size))
    return seen


@pytest.mark.parametrize("game_id", sorted(REGISTRY))
def test_random_play_respects_the_contract(game_id):
    assert fuzz_random_play(game_id, SMOKE_EPISODES)


@pytest.mark.slow
@pytest.mark.parametrize("game_id", sorted(REGISTRY))
def test_random_play_respects_the_contract_at_scale(game_id):
    assert fuzz_random_play(game_id, FULL_EPISODES)


@pytest.mark.parametrize("game_id", sorted(REGISTRY))
def test_engine_class_matches_meta(game_id):
    spec = load_suite().spec(game_id)
    env = REGISTRY[game_id](spec)
    assert env.action_space.n == spec.action_space_size
    assert env.observation_space.shape == (spec.observation_dim,)
    assert env.game_spec.id == game_id
