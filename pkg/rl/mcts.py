"""
Flat policy-rollout action selection.

From the current position, play ``n_rollouts`` games to the end with both
seats sampling from the masked policy, and pick the first action that led to
the most wins for the player to move. There is no tree and no value
bootstrap; rollouts that reach the move cap count as draws.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from engine.core_env import DEFAULT_MOVE_CAP, ContractError
from rl.network import PolicyParams, greedy_action, policy_distribution
from runtime.rng import SplitMix64, derive_seed, sample_index

DEFAULT_ROLLOUTS = 100


class RolloutResult(Enum):
    MOVER = "mover"
    OPPONENT = "opponent"
    DRAW = "draw"


@dataclass
class RolloutTally:
    n_actions: int
    visits: List[int] = field(default_factory=list)
    wins: List[int] = field(default_factory=list)

    def __post_init__(self):
        self.visits = self.visits or [0] * self.n_actions
        self.wins = self.wins or [0] * self.n_actions

    def record(self, action: int, won: bool) -> None:
        self.visits[action] += 1
        if won:
            self.wins[action] += 1

    def merge(self, other: "RolloutTally") -> "RolloutTally":
        return RolloutTally(
            self.n_actions,
            [a + b for a, b in zip(self.visits, other.visits)],
            [a + b for a, b in zip(self.wins, other.wins)],
        )

    @property
    def total(self) -> int:
        return sum(self.visits)

    def summary(self) -> str:
        return " ".join(f"{action}:{self.wins[action]}/{self.visits[action]}" for action in range(self.n_actions) if self.visits[action])


def _policy_move(params: PolicyParams, env, rng: SplitMix64) -> int:
    return sample_index(policy_distribution(params, env.observation(), env.valid_moves()), rng)


def _play_out(params: PolicyParams, env, rng: SplitMix64, move_cap: int, mover) -> RolloutResult:
    while not env.done:
        if env.move_count >= move_cap:
            return RolloutResult.DRAW
        env.step(_policy_move(params, env, rng))
    if env.winner is None:
        return RolloutResult.DRAW
    return RolloutResult.MOVER if env.winner == mover else RolloutResult.OPPONENT


def rollout(params: PolicyParams, env, rng: SplitMix64, move_cap: int = DEFAULT_MOVE_CAP) -> RolloutResult:
    """Play one game out on a copy of ``env``; the result is relative to the player to move now."""
    if env.done:
        raise ContractError("rollout from a finished game")
    return _play_out(params, env.clone(), rng, move_cap, env.current_player)


def search(
    params: PolicyParams,
    env,
    n_rollouts: int = DEFAULT_ROLLOUTS,
    seed: int = 0,
    move_cap: int = DEFAULT_MOVE_CAP,
) -> Tuple[int, RolloutTally]:
    if env.done:
        raise ContractError("cannot select an action in a finished game")
    if n_rollouts < 1:
        raise ContractError("n_rollouts must be at least 1")
    mover = env.current_player
    tally = RolloutTally(env.game_spec.action_space_size)
    for index in range(n_rollouts):
        rng = SplitMix64(derive_seed(seed, index))
        sim = env.clone()
        first = _policy_move(params, sim, rng)
        sim.step(first)
        tally.record(first, _play_out(params, sim, rng, move_cap, mover) is RolloutResult.MOVER)
    if any(tally.wins):
        return int(np.argmax(tally.wins)), tally
    return greedy_action(policy_distribution(params, env.observation(), env.valid_moves())), tally


def select_action(
    params: PolicyParams,
    env,
    n_rollouts: int = DEFAULT_ROLLOUTS,
    seed: int = 0,
    move_cap: int = DEFAULT_MOVE_CAP,
    tally_out: Optional[list] = None,
) -> int:
    action, tally = search(params, env, n_rollouts=n_rollouts, seed=seed, move_cap=move_cap)
    if tally_out is not None:
        tally_out.append(tally)
    return action
