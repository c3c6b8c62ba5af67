"""
SplitMix64 pseudo-random generator.

Every random decision in the arena (game setup, agent sampling, opponent draws,
rollout streams) flows through this generator so runs are bit-reproducible on
any platform. The state update and output mix are the reference SplitMix64
constants; floats take the top 53 bits.
"""
import hashlib
from typing import List, MutableSequence, Sequence, TypeVar

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

T = TypeVar("T")


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(base: int, *keys: int) -> int:
    """Derive an independent 64-bit seed from a base seed and integer keys."""
    state = int(base) & MASK64
    for key in keys:
        state = _mix((state + GOLDEN_GAMMA + (int(key) & MASK64) * 0xD1B54A32D192ED03) & MASK64)
    return _mix((state + GOLDEN_GAMMA) & MASK64)


class SplitMix64:
    def __init__(self, seed: int = 0):
        self.state = int(seed) & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return _mix(self.state)

    def random(self) -> float:
        """Uniform float in [0, 1)."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise ValueError("randbelow requires n >= 1")
        limit = ((1 << 64) // n) * n
        while True:
            value = self.next_u64()
            if value < limit:
                return value % n

    def choice(self, items: Sequence[T]) -> T:
        if not items:
            raise ValueError("choice from an empty sequence")
        return items[self.randbelow(len(items))]

    def shuffle(self, items: MutableSequence[T]) -> None:
        for idx in range(len(items) - 1, 0, -1):
            swap = self.randbelow(idx + 1)
            items[idx], items[swap] = items[swap], items[idx]

    def digits(self, count: int) -> List[int]:
        return [self.randbelow(10) for _ in range(count)]

    def copy(self) -> "SplitMix64":
        twin = SplitMix64()
        twin.state = self.state
        return twin

    def numpy(self) -> np.random.Generator:
        """A PCG64 generator seeded from this stream (weight init, minibatch order)."""
        return np.random.default_rng(self.next_u64())


def sample_index(probs: Sequence[float], rng: SplitMix64) -> int:
    """Draw an index from a probability vector; zero-probability entries are never returned."""
    u = rng.random()
    cumulative = 0.0
    last_positive = -1
    for idx, p in enumerate(probs):
        if p <= 0.0:
            continue
        last_positive = idx
        cumulative += float(p)
        if u < cumulative:
            return idx
    if last_positive < 0:
        raise ValueError("probability vector has no positive entry")
    return last_positive


def text_key(text: str) -> int:
    """Stable 64-bit key for a string (game ids, agent specs) to feed ``derive_seed``."""
    return int.from_bytes(hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest(), "little")
