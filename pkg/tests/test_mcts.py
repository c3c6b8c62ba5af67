import math
from functools import lru_cache

import pytest

from engine.core_env import ContractError
from engine.games.reach27 import Reach27
from rl.mcts import RolloutResult, RolloutTally, rollout, search, select_action
from rl.network import PolicyParams
from runtime.rng import SplitMix64
from tests.fixtures.broken_games import NeverEnding

UNIFORM = PolicyParams.zeros(2, 9)


@lru_cache(maxsize=None)
def random_play_win_probability(total: int) -> float:
    """Chance that the player to move at ``total`` wins when both sides add uniformly at random."""
    wins = 0.0
    for add in range(1, 10):
        reached = total + add
        if reached == 27:
            wins += 1.0
        elif reached < 27:
            wins += 1.0 - random_play_win_probability(reached)
    return wins / 9


def reach27_at(total: int) -> Reach27:
    env = Reach27()
    env.reset(options={"total": total})
    return env


def test_rollout_matches_exact_random_play_value():
    expected = random_play_win_probability(0)
    rng = SplitMix64(2024)
    env = Reach27()
    n = 4000
    wins = sum(1 for _ in range(n) if rollout(UNIFORM, env, rng) is RolloutResult.MOVER)
    assert abs(wins / n - expected) < 4 * math.sqrt(expected * (1 - expected) / n)
    assert env.move_count == 0


def test_rollout_to_the_cap_is_a_draw():
    params = PolicyParams.zeros(1, 2)
    assert rollout(params, NeverEnding(), SplitMix64(0), move_cap=10) is RolloutResult.DRAW


def test_only_winning_move_is_selected_at_26():
    action, tally = search(UNIFORM, reach27_at(26), n_rollouts=100, seed=0)
    assert action == 0
    assert tally.total == 100
    assert all(tally.wins[index] == 0 for index in range(1, 9))
    assert tally.wins[0] == tally.visits[0] > 0


def test_tallies_are_conserved_and_reproducible():
    env = reach27_at(5)
    first_action, first = search(UNIFORM, env, n_rollouts=64, seed=9)
    second_action, second = search(UNIFORM, env, n_rollouts=64, seed=9)
    assert first.total == 64
    assert all(won <= visits for won, visits in zip(first.wins, first.visits))
    assert (first_action, first.visits, first.wins) == (second_action, second.visits, second.wins)


def test_zero_wins_fall_back_to_policy_argmax():
    params = PolicyParams.zeros(1, 2)
    assert select_action(params, NeverEnding(), n_rollouts=8, move_cap=6) == 0
    params.bp[1] = 3.0
    tallies = []
    assert select_action(params, NeverEnding(), n_rollouts=8, move_cap=6, tally_out=tallies) == 1
    assert tallies[0].wins == [0, 0]
    assert tallies[0].total == 8


def test_finished_games_and_bad_budgets_are_rejected():
    env = reach27_at(26)
    with pytest.raises(ContractError):
        search(UNIFORM, env, n_rollouts=0)
    env.step(0)
    with pytest.raises(ContractError):
        search(UNIFORM, env)
    with pytest.raises(ContractError):
        rollout(UNIFORM, env, SplitMix64(0))


def test_tally_merge_and_summary():
    left = RolloutTally(3, [2, 0, 1], [1, 0, 0])
    right = RolloutTally(3, [0, 4, 1], [0, 3, 1])
    merged = left.merge(right)
    assert (merged.visits, merged.wins, merged.total) == ([2, 4, 2], [1, 3, 1], 8)
    assert merged.summary() == "0:1/2 1:3/4 2:1/2"
