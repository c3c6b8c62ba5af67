"""
Clipped-surrogate policy optimisation with generalised advantage estimation.

Loss minimised per minibatch::

    -mean(min(r * A, clip(r, 1 - eps, 1 + eps) * A))
    + value_coef * mean((V - R) ** 2)
    - entropy_coef * mean(H)

Gradients are derived by hand and pushed through ``network.backward``.
"""
import dataclasses
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np

from engine.core_env import ContractError
from rl.network import PolicyParams, backward, forward_batch, masked_log_softmax


class TrainingError(RuntimeError):
    pass


@dataclass
class PPOConfig:
    learning_rate: float = 3e-4
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip_range: float = 0.2
    batch_size: int = 64
    rollout_length: int = 2048
    epochs_per_update: int = 10
    value_coef: float = 0.5
    entropy_coef: float = 0.0
    max_grad_norm: float = 0.5
    adam_eps: float = 1e-5

    def __post_init__(self):
        for name in ("learning_rate", "gamma", "gae_lambda", "clip_range", "batch_size", "rollout_length", "epochs_per_update", "max_grad_norm", "adam_eps"):
            if getattr(self, name) <= 0:
                raise ContractError(f"PPOConfig.{name} must be positive")
        if self.clip_range >= 1:
            raise ContractError("PPOConfig.clip_range must be below 1")
        if self.value_coef < 0 or self.entropy_coef < 0:
            raise ContractError("PPOConfig coefficients must be non-negative")

    @classmethod
    def from_overrides(cls, overrides: Optional[Mapping[str, Any]] = None) -> "PPOConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(overrides or {}) - known
        if unknown:
            raise ContractError(f"unknown PPO settings: {sorted(unknown)}")
        return cls(**dict(overrides or {}))


@dataclass
class RolloutBuffer:
    capacity: int
    observations: List[np.ndarray] = field(default_factory=list)
    actions: List[int] = field(default_factory=list)
    log_probs: List[float] = field(default_factory=list)
    rewards: List[float] = field(default_factory=list)
    values: List[float] = field(default_factory=list)
    dones: List[float] = field(default_factory=list)
    masks: List[np.ndarray] = field(default_factory=list)
    advantages: Optional[np.ndarray] = None
    returns: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.actions)

    @property
    def full(self) -> bool:
        return len(self) >= self.capacity

    def add(self, obs, action: int, log_prob: float, reward: float, value: float, done: bool, mask: np.ndarray) -> None:
        if self.full:
            raise ContractError("rollout buffer is full")
        self.observations.append(np.asarray(obs, dtype=np.float32))
        self.actions.append(int(action))
        self.log_probs.append(float(log_prob))
        self.rewards.append(float(reward))
        self.values.append(float(value))
        self.dones.append(1.0 if done else 0.0)
        self.masks.append(np.asarray(mask, dtype=bool))
        self.advantages = None
        self.returns = None

    def finish(self, last_value: float, gamma: float, gae_lambda: float) -> None:
        """Compute advantages and returns; ``last_value`` bootstraps an unfinished final episode."""
        self.advantages, self.returns = compute_gae(self.rewards, self.values, self.dones, gamma, gae_lambda, last_value)

    def clear(self) -> None:
        for name in ("observations", "actions", "log_probs", "rewards", "values", "dones", "masks"):
            getattr(self, name).clear()
        self.advantages = None
        self.returns = None


def compute_gae(rewards, values, dones, gamma: float, gae_lambda: float, last_value: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    """
    ``dones[t] == 1`` means the episode ended after step t, so neither the next
    value nor the next advantage flows back across that boundary.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=np.float64)
    if not len(rewards) == len(values) == len(dones):
        raise ContractError("rewards, values and dones must have equal length")
    advantages = np.zeros_like(rewards)
    next_value = float(last_value)
    next_advantage = 0.0
    for t in range(len(rewards) - 1, -1, -1):
        keep = 1.0 - dones[t]
        delta = rewards[t] + gamma * next_value * keep - values[t]
        next_advantage = delta + gamma * gae_lambda * keep * next_advantage
        advantages[t] = next_advantage
        next_value = values[t]
    return advantages, advantages + values


def clipped_objective(ratio, advantage, clip_range: float):
    ratio = np.asarray(ratio, dtype=np.float64)
    advantage = np.asarray(advantage, dtype=np.float64)
    if np.any(ratio <= 0):
        raise ContractError("probability ratio must be positive")
    result = np.minimum(ratio * advantage, np.clip(ratio, 1.0 - clip_range, 1.0 + clip_range) * advantage)
    return float(result) if result.ndim == 0 else result


@dataclass
class Batch:
    observations: np.ndarray
    actions: np.ndarray
    old_log_probs: np.ndarray
    advantages: np.ndarray
    returns: np.ndarray
    masks: np.ndarray

    def __len__(self) -> int:
        return len(self.actions)

    def take(self, indices: np.ndarray) -> "Batch":
        return Batch(*(getattr(self, f.name)[indices] for f in dataclasses.fields(self)))


def buffer_batch(buffer: RolloutBuffer, normalize: bool = True) -> Batch:
    if buffer.advantages is None:
        raise ContractError("advantages have not been computed for this buffer")
    advantages = buffer.advantages.copy()
    if normalize and len(advantages) > 1:
        advantages = (advantages - advantages.mean()) / (advantages.std() + 1e-8)
    return Batch(
        observations=np.stack(buffer.observations),
        actions=np.asarray(buffer.actions, dtype=np.int64),
        old_log_probs=np.asarray(buffer.log_probs, dtype=np.float64),
        advantages=advantages,
        returns=np.asarray(buffer.returns, dtype=np.float64),
        masks=np.stack(buffer.masks),
    )


def loss_and_grads(params: PolicyParams, batch: Batch, config: PPOConfig) -> Tuple[float, Dict[str, np.ndarray], Dict[str, float]]:
    """Full PPO loss on a batch, its analytic gradient and diagnostics."""
    n = len(batch)
    rows = np.arange(n)
    logits, values, cache = forward_batch(params, batch.observations)
    dtype = logits.dtype
    log_probs = masked_log_softmax(logits, batch.masks)
    probs = np.exp(log_probs)
    logp_taken = log_probs[rows, batch.actions]
    if not np.all(np.isfinite(logp_taken)):
        raise TrainingError("buffer contains an action outside its valid mask")

    ratio = np.exp(logp_taken - batch.old_log_probs)
    adv = batch.advantages
    unclipped = ratio * adv
    clipped = np.clip(ratio, 1.0 - config.clip_range, 1.0 + config.clip_range) * adv
    policy_loss = -np.mean(np.minimum(unclipped, clipped))
    value_error = values - batch.returns
    value_loss = np.mean(value_error ** 2)
    plogp = np.where(batch.masks, probs * np.where(batch.masks, log_probs, 0.0), 0.0)
    entropy = -plogp.sum(axis=1)
    loss = policy_loss + config.value_coef * value_loss - config.entropy_coef * np.mean(entropy)

    # d(min)/d(logp): r * A on the unclipped branch, zero once the clip is active
    surrogate_grad = np.where(unclipped <= clipped, unclipped, 0.0)
    onehot = np.zeros_like(probs)
    onehot[rows, batch.actions] = 1.0
    dlogits = -(surrogate_grad[:, None] * (onehot - probs)) / n
    if config.entropy_coef:
        safe_logp = np.where(batch.masks, log_probs, 0.0)
        dentropy = -probs * (safe_logp + entropy[:, None])
        dlogits -= config.entropy_coef * dentropy / n
    dvalues = config.value_coef * 2.0 * value_error / n
    grads = backward(params, cache, dlogits.astype(dtype), dvalues.astype(dtype))

    stats = {
        "policy_loss": float(policy_loss),
        "value_loss": float(value_loss),
        "entropy": float(np.mean(entropy)),
        "approx_kl": float(np.mean(batch.old_log_probs - logp_taken)),
        "clip_fraction": float(np.mean(np.abs(ratio - 1.0) > config.clip_range)),
    }
    return float(loss), grads, stats


def clip_grad_norm(grads: Dict[str, np.ndarray], max_norm: float) -> float:
    """Scale gradients in place so their global L2 norm is at most max_norm; returns the norm before clipping."""
    total = float(np.sqrt(sum(float(np.sum(np.square(g, dtype=np.float64))) for g in grads.values())))
    coef = max_norm / (total + 1e-6)
    if coef < 1.0:
        for name in grads:
            grads[name] = grads[name] * coef
    return total


class Adam:
    def __init__(self, learning_rate: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-5):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: Dict[str, np.ndarray] = {}
        self.v: Dict[str, np.ndarray] = {}

    def step(self, params: PolicyParams, grads: Dict[str, np.ndarray]) -> None:
        self.t += 1
        correction1 = 1.0 - self.beta1 ** self.t
        correction2 = 1.0 - self.beta2 ** self.t
        for name, tensor in params.items():
            grad = grads[name].astype(np.float64)
            m = self.m.get(name, np.zeros_like(grad))
            v = self.v.get(name, np.zeros_like(grad))
            m = self.beta1 * m + (1.0 - self.beta1) * grad
            v = self.beta2 * v + (1.0 - self.beta2) * grad * grad
            self.m[name], self.v[name] = m, v
            update = self.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + self.eps)
            tensor -= update.astype(tensor.dtype)


class PPOLearner:
    """Owns the trained parameters and one Adam optimiser for the whole run."""

    def __init__(self, params: PolicyParams, config: PPOConfig, rng: np.random.Generator):
        self.params = params
        self.config = config
        self.rng = rng
        self.optimizer = Adam(config.learning_rate, eps=config.adam_eps)
        self.updates = 0

    def update(self, buffer: RolloutBuffer) -> Dict[str, float]:
        if len(buffer) == 0:
            raise ContractError("cannot update from an empty rollout buffer")
        batch = buffer_batch(buffer)
        n = len(batch)
        history: List[Dict[str, float]] = []
        losses: List[float] = []
        for _ in range(self.config.epochs_per_update):
            order = self.rng.permutation(n)
            for start in range(0, n, self.config.batch_size):
                minibatch = batch.take(order[start:start + self.config.batch_size])
                loss, grads, stats = loss_and_grads(self.params, minibatch, self.config)
                if not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads.values()):
                    raise TrainingError(f"non-finite loss or gradient in update {self.updates + 1}")
                clip_grad_norm(grads, self.config.max_grad_norm)
                self.optimizer.step(self.params, grads)
                losses.append(loss)
                history.append(stats)
        if not self.params.is_finite():
            raise TrainingError(f"parameters became non-finite in update {self.updates + 1}")
        self.updates += 1
        summary = {key: float(np.mean([stats[key] for stats in history])) for key in history[0]}
        summary["loss"] = float(np.mean(losses))
        return summary


def ppo_update(params: PolicyParams, buffer: RolloutBuffer, config: PPOConfig, rng: Optional[np.random.Generator] = None) -> PolicyParams:
    """One update from fresh optimiser state; returns new parameters and leaves ``params`` untouched."""
    learner = PPOLearner(params.copy(), config, rng if rng is not None else np.random.default_rng(0))
    learner.update(buffer)
    return learner.params
