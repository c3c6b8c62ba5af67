"""
Shared-trunk policy/value network in plain numpy.

    obs -> tanh(W1) -> tanh(W2) -> policy logits (Wp)
                                -> value        (Wv)

Parameters are stored as float32; ``astype(np.float64)`` gives a copy for
numerical gradient checks.
"""
from dataclasses import dataclass
from typing import Dict, Iterator, Sequence, Tuple

import numpy as np

from engine.core_env import ContractError

HIDDEN: Tuple[int, int] = (64, 64)
PARAM_ORDER: Tuple[str, ...] = ("w1", "b1", "w2", "b2", "wp", "bp", "wv", "bv")

_INIT_GAINS = {"w1": np.sqrt(2.0), "w2": np.sqrt(2.0), "wp": 0.01, "wv": 1.0}


def _orthogonal(shape: Tuple[int, int], gain: float, rng: np.random.Generator) -> np.ndarray:
    rows, cols = shape
    flat = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(flat)
    q *= np.sign(np.diag(r))
    if rows < cols:
        q = q.T
    return gain * q[:rows, :cols]


@dataclass
class PolicyParams:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    wp: np.ndarray
    bp: np.ndarray
    wv: np.ndarray
    bv: np.ndarray

    @classmethod
    def shapes(cls, obs_dim: int, n_actions: int, hidden: Tuple[int, int] = HIDDEN) -> Dict[str, Tuple[int, ...]]:
        h1, h2 = hidden
        return {
            "w1": (obs_dim, h1),
            "b1": (h1,),
            "w2": (h1, h2),
            "b2": (h2,),
            "wp": (h2, n_actions),
            "bp": (n_actions,),
            "wv": (h2, 1),
            "bv": (1,),
        }

    @classmethod
    def zeros(cls, obs_dim: int, n_actions: int, dtype=np.float32) -> "PolicyParams":
        return cls(**{name: np.zeros(shape, dtype=dtype) for name, shape in cls.shapes(obs_dim, n_actions).items()})

    @classmethod
    def init(cls, obs_dim: int, n_actions: int, rng: np.random.Generator) -> "PolicyParams":
        """Orthogonal weights (gain sqrt(2) in the trunk, 0.01 policy head, 1 value head), zero biases."""
        tensors = {}
        for name, shape in cls.shapes(obs_dim, n_actions).items():
            if name.startswith("w"):
                tensors[name] = _orthogonal(shape, _INIT_GAINS[name], rng).astype(np.float32)
            else:
                tensors[name] = np.zeros(shape, dtype=np.float32)
        return cls(**tensors)

    @property
    def obs_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def n_actions(self) -> int:
        return self.wp.shape[1]

    def items(self) -> Iterator[Tuple[str, np.ndarray]]:
        for name in PARAM_ORDER:
            yield name, getattr(self, name)

    def copy(self) -> "PolicyParams":
        return PolicyParams(**{name: tensor.copy() for name, tensor in self.items()})

    def astype(self, dtype) -> "PolicyParams":
        return PolicyParams(**{name: tensor.astype(dtype) for name, tensor in self.items()})

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(tensor)) for _, tensor in self.items())


@dataclass
class ForwardCache:
    obs: np.ndarray
    h1: np.ndarray
    h2: np.ndarray


def _as_batch(params: PolicyParams, obs) -> Tuple[np.ndarray, bool]:
    array = np.asarray(obs, dtype=params.w1.dtype)
    single = array.ndim == 1
    if single:
        array = array[None, :]
    if array.ndim != 2 or array.shape[1] != params.obs_dim:
        raise ContractError(f"observation shape {np.shape(obs)} does not match network input dim {params.obs_dim}")
    return array, single


def forward_batch(params: PolicyParams, obs) -> Tuple[np.ndarray, np.ndarray, ForwardCache]:
    """Logits (B, A), values (B,) and the activations needed by ``backward``."""
    x, _ = _as_batch(params, obs)
    h1 = np.tanh(x @ params.w1 + params.b1)
    h2 = np.tanh(h1 @ params.w2 + params.b2)
    logits = h2 @ params.wp + params.bp
    values = (h2 @ params.wv + params.bv)[:, 0]
    return logits, values, ForwardCache(obs=x, h1=h1, h2=h2)


def forward(params: PolicyParams, obs) -> Tuple[np.ndarray, float]:
    """Logits and value for a single observation."""
    x, single = _as_batch(params, obs)
    if not single:
        raise ContractError("forward expects a single observation; use forward_batch for batches")
    logits, values, _ = forward_batch(params, x)
    return logits[0], float(values[0])


def backward(params: PolicyParams, cache: ForwardCache, dlogits: np.ndarray, dvalues: np.ndarray) -> Dict[str, np.ndarray]:
    """Gradients of a scalar loss given its gradients w.r.t. logits (B, A) and values (B,)."""
    dv = dvalues[:, None]
    grads = {
        "wp": cache.h2.T @ dlogits,
        "bp": dlogits.sum(axis=0),
        "wv": cache.h2.T @ dv,
        "bv": dv.sum(axis=0),
    }
    dz2 = (dlogits @ params.wp.T + dv @ params.wv.T) * (1.0 - cache.h2 ** 2)
    grads["w2"] = cache.h1.T @ dz2
    grads["b2"] = dz2.sum(axis=0)
    dz1 = (dz2 @ params.w2.T) * (1.0 - cache.h1 ** 2)
    grads["w1"] = cache.obs.T @ dz1
    grads["b1"] = dz1.sum(axis=0)
    return grads


def valid_mask(valid: Sequence[int], n_actions: int) -> np.ndarray:
    mask = np.zeros(n_actions, dtype=bool)
    if len(valid) == 0:
        raise ContractError("valid move list is empty")
    for index in valid:
        if not 0 <= int(index) < n_actions:
            raise ContractError(f"valid move {index} outside action space of size {n_actions}")
        mask[int(index)] = True
    return mask


def masked_log_softmax(logits: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Row-wise log-probabilities over the masked entries; -inf elsewhere."""
    z = np.where(mask, logits, -np.inf)
    z = z - z.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def masked_distribution(logits: np.ndarray, valid: Sequence[int]) -> np.ndarray:
    """Softmax restricted to the valid indices; exactly zero elsewhere."""
    logits = np.asarray(logits, dtype=np.float64)
    mask = valid_mask(valid, logits.shape[-1])
    probs = np.exp(masked_log_softmax(logits, mask))
    return probs / probs.sum()


def policy_distribution(params: PolicyParams, obs, valid: Sequence[int]) -> np.ndarray:
    logits, _ = forward(params, obs)
    return masked_distribution(logits, valid)


def greedy_action(probs: np.ndarray) -> int:
    """Argmax with ties to the lowest index."""
    return int(np.argmax(probs))
