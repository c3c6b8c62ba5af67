"""
Self-play training against a pool of frozen checkpoints.

Each episode the learner takes a uniformly random seat. The opponent (a
uniform-random agent during the first checkpoint interval, afterwards a
uniform draw from the checkpoint pool) is folded into the environment
dynamics, so the buffer only ever holds the learner's own transitions and
rewards from the learner's seat.
"""
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Tuple

import numpy as np

from engine.core_env import ContractError, MoveCapWrapper, Seat, TwoPlayerEnv, wrap_move_cap
from rl.checkpoint import CHECKPOINT_PREFIX, CheckpointHeader, save_checkpoint
from rl.network import PolicyParams, forward, masked_log_softmax, policy_distribution, valid_mask
from rl.ppo import PPOConfig, PPOLearner, RolloutBuffer
from runtime.artifact_store import ArtifactStore
from runtime.rng import SplitMix64, derive_seed, sample_index

TRUNCATION_FLAG_RATE = 0.2

# derive_seed keys for the independent streams of one run
_INIT_STREAM = 0
_MINIBATCH_STREAM = 1
_PLAY_STREAM = 2
_EPISODE_STREAM = 3


@dataclass(frozen=True)
class TrainingSchedule:
    total_timesteps: int = 1_000_000
    checkpoint_interval: int = 250_000
    epsilon_start: float = 1.0
    epsilon_end: float = 0.1

    def __post_init__(self):
        if self.total_timesteps < 1 or self.checkpoint_interval < 1:
            raise ContractError("total_timesteps and checkpoint_interval must be positive")
        if self.total_timesteps % self.checkpoint_interval:
            raise ContractError("checkpoint_interval must divide total_timesteps")

    @property
    def n_checkpoints(self) -> int:
        return self.total_timesteps // self.checkpoint_interval

    def checkpoint_timesteps(self) -> List[int]:
        return [self.checkpoint_interval * k for k in range(1, self.n_checkpoints + 1)]

    @classmethod
    def from_run_config(cls, config) -> "TrainingSchedule":
        return cls(
            total_timesteps=config.total_timesteps,
            checkpoint_interval=config.checkpoint_interval,
            epsilon_start=config.epsilon_start,
            epsilon_end=config.epsilon_end,
        )


def epsilon_at(t: int, schedule: TrainingSchedule) -> float:
    if not 0 <= t <= schedule.total_timesteps:
        raise ContractError(f"timestep {t} outside [0, {schedule.total_timesteps}]")
    fraction = t / schedule.total_timesteps
    return schedule.epsilon_start + (schedule.epsilon_end - schedule.epsilon_start) * fraction


@dataclass
class PoolEntry:
    timestep: int
    params: PolicyParams


class CheckpointPool:
    def __init__(self):
        self.entries: List[PoolEntry] = []

    def add(self, timestep: int, params: PolicyParams) -> None:
        if self.entries and timestep <= self.entries[-1].timestep:
            raise ContractError(f"checkpoint timestep {timestep} is not after {self.entries[-1].timestep}")
        self.entries.append(PoolEntry(timestep, params.copy()))

    def timesteps(self) -> List[int]:
        return [entry.timestep for entry in self.entries]

    def latest(self) -> PoolEntry:
        if not self.entries:
            raise ContractError("checkpoint pool is empty")
        return self.entries[-1]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[PoolEntry]:
        return iter(self.entries)


@dataclass
class Opponent:
    """A frozen policy, or the uniform-random agent when ``params`` is None."""

    params: Optional[PolicyParams] = None
    timestep: Optional[int] = None

    @property
    def is_random(self) -> bool:
        return self.params is None

    def act(self, env, rng: SplitMix64) -> int:
        valid = env.valid_moves()
        if self.params is None:
            return rng.choice(valid)
        return sample_index(policy_distribution(self.params, env.observation(), valid), rng)


def sample_opponent(pool: CheckpointPool, current_timestep: int, rng: SplitMix64, checkpoint_interval: int) -> Opponent:
    if current_timestep < checkpoint_interval or len(pool) == 0:
        return Opponent()
    entry = pool.entries[rng.randbelow(len(pool))]
    return Opponent(params=entry.params, timestep=entry.timestep)


@dataclass
class TrainingStats:
    episodes: int = 0
    wins: int = 0
    losses: int = 0
    draws: int = 0
    truncations: int = 0

    @property
    def truncation_rate(self) -> float:
        return self.truncations / self.episodes if self.episodes else 0.0

    @property
    def flagged(self) -> bool:
        return self.truncation_rate > TRUNCATION_FLAG_RATE

    def as_dict(self) -> Dict[str, object]:
        return {
            "episodes": self.episodes,
            "wins": self.wins,
            "losses": self.losses,
            "draws": self.draws,
            "truncations": self.truncations,
            "truncation_rate": round(self.truncation_rate, 6),
            "flagged": self.flagged,
        }


@dataclass
class TrainingRun:
    game_id: str
    pool: CheckpointPool
    params: PolicyParams
    stats: TrainingStats
    progress: List[dict] = field(default_factory=list)


CheckpointCallback = Callable[[int, PolicyParams], None]


def _learner_reward(env: MoveCapWrapper, learner: Seat) -> float:
    if env.winner is None:
        return 0.0
    return 1.0 if env.winner == learner else -1.0


def _opponent_turns(env: MoveCapWrapper, opponent: Opponent, learner: Seat, rng: SplitMix64) -> Tuple[bool, float]:
    """Let the opponent move until it is the learner's turn; returns (episode_over, learner_reward)."""
    while not env.done and env.current_player != learner:
        outcome = env.step(opponent.act(env, rng))
        if outcome.terminated or outcome.truncated:
            return True, _learner_reward(env, learner)
    return env.done, _learner_reward(env, learner) if env.done else 0.0


def train(
    make_env: Callable[[], TwoPlayerEnv],
    schedule: TrainingSchedule,
    config: PPOConfig,
    seed: int,
    move_cap: int = 100,
    mask_invalid: bool = True,
    on_checkpoint: Optional[CheckpointCallback] = None,
    on_update: Optional[Callable[[dict], None]] = None,
) -> TrainingRun:
    """Deterministic given ``seed``; emits exactly ``schedule.n_checkpoints`` checkpoints."""
    probe = make_env()
    game_id = probe.game_spec.id
    obs_dim, n_actions = probe.game_spec.observation_dim, probe.game_spec.action_space_size
    params = PolicyParams.init(obs_dim, n_actions, SplitMix64(derive_seed(seed, _INIT_STREAM)).numpy())
    learner = PPOLearner(params, config, SplitMix64(derive_seed(seed, _MINIBATCH_STREAM)).numpy())
    rng = SplitMix64(derive_seed(seed, _PLAY_STREAM))
    buffer = RolloutBuffer(config.rollout_length)
    pool = CheckpointPool()
    stats = TrainingStats()
    run = TrainingRun(game_id=game_id, pool=pool, params=learner.params, stats=stats)
    full_mask = np.ones(n_actions, dtype=bool)
    recent_rewards: List[float] = []

    def record_episode(reward: float, truncated: bool) -> None:
        stats.episodes += 1
        if truncated:
            stats.truncations += 1
        if reward > 0:
            stats.wins += 1
        elif reward < 0:
            stats.losses += 1
        else:
            stats.draws += 1
        recent_rewards.append(reward)

    t = 0
    while t < schedule.total_timesteps:
        env = wrap_move_cap(make_env(), move_cap)
        env.reset(seed=derive_seed(seed, _EPISODE_STREAM, stats.episodes))
        seat = Seat.P1 if rng.randbelow(2) == 0 else Seat.P2
        opponent = sample_opponent(pool, t, rng, schedule.checkpoint_interval)
        done, reward = _opponent_turns(env, opponent, seat, rng)
        if done:
            record_episode(reward, env.truncated)
            continue

        while not done and t < schedule.total_timesteps:
            obs = env.observation()
            valid = env.valid_moves()
            mask = valid_mask(valid, n_actions) if mask_invalid else full_mask
            logits, value = forward(learner.params, obs)
            log_probs = masked_log_softmax(logits.astype(np.float64), mask)
            if rng.random() < epsilon_at(t, schedule):
                action = rng.choice(valid)
            else:
                action = sample_index(np.exp(log_probs), rng)

            outcome = env.step(action)
            if outcome.terminated or outcome.truncated:
                done, reward = True, float(outcome.reward)
            else:
                done, reward = _opponent_turns(env, opponent, seat, rng)
            buffer.add(obs, action, float(log_probs[action]), reward, value, done, mask)
            t += 1
            if done:
                record_episode(reward, env.truncated)

            if buffer.full or t == schedule.total_timesteps:
                last_value = 0.0 if done else forward(learner.params, env.observation())[1]
                buffer.finish(last_value, config.gamma, config.gae_lambda)
                summary = learner.update(buffer)
                buffer.clear()
                run.progress.append(_progress_record(learner.updates, t, epsilon_at(t, schedule), recent_rewards, summary))
                if on_update is not None:
                    on_update(run.progress[-1])
                recent_rewards = []
            if t % schedule.checkpoint_interval == 0:
                pool.add(t, learner.params)
                if on_checkpoint is not None:
                    on_checkpoint(t, pool.latest().params)

    run.params = learner.params
    return run


def _progress_record(update: int, t: int, epsilon: float, rewards: List[float], summary: Dict[str, float]) -> dict:
    record = {
        "type": "update",
        "update": update,
        "timestep": t,
        "epsilon": round(epsilon, 6),
        "episodes": len(rewards),
        "mean_episode_reward": round(float(np.mean(rewards)), 6) if rewards else None,
    }
    record.update({key: round(value, 6) for key, value in sorted(summary.items())})
    return record


def train_game(
    store: ArtifactStore,
    make_env: Callable[[], TwoPlayerEnv],
    schedule: TrainingSchedule,
    config: PPOConfig,
    seed: int,
    move_cap: int = 100,
    mask_invalid: bool = True,
    config_text: Optional[str] = None,
    on_update: Optional[Callable[[dict], None]] = None,
) -> Tuple[TrainingRun, List[str]]:
    """Train and persist checkpoints plus the progress log under ``checkpoints/<game_id>/``."""
    spec = make_env().game_spec
    game_id = spec.id
    keys: List[str] = []

    def persist(timestep: int, params: PolicyParams) -> None:
        header = CheckpointHeader(game_id=game_id, obs_dim=spec.observation_dim, n_actions=spec.action_space_size, timestep=timestep, seed=seed)
        keys.append(save_checkpoint(store, params, header))

    run = train(make_env, schedule, config, seed, move_cap=move_cap, mask_invalid=mask_invalid, on_checkpoint=persist, on_update=on_update)
    prefix = f"{CHECKPOINT_PREFIX}/{game_id}"
    store.write_jsonl(f"{prefix}/training.jsonl", run.progress + [dict(type="stats", **run.stats.as_dict())])
    if config_text is not None:
        store.write_text(f"{prefix}/config.txt", config_text)
    return run, keys
