"""Divide and Conquer: divide a shared integer by one of its prime factors (primes up to 50); reaching 1 wins."""
from dataclasses import dataclass
from typing import Any, Dict, List, Tuple

from engine.core_env import ContractError, Outcome, Seat, TwoPlayerEnv

PRIMES: Tuple[int, ...] = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)
START_RANGE = (24, 999)
MAX_EXPONENT = 10


def is_smooth(n: int) -> bool:
    """True when every prime factor of n is in PRIMES."""
    if n < 1:
        return False
    for prime in PRIMES:
        while n % prime == 0:
            n //= prime
    return n == 1


def omega(n: int) -> int:
    """Number of prime factors of n counted with multiplicity."""
    count = 0
    for prime in PRIMES:
        while n % prime == 0:
            n //= prime
            count += 1
    return count


STARTING_NUMBERS: Tuple[int, ...] = tuple(n for n in range(START_RANGE[0], START_RANGE[1] + 1) if is_smooth(n))


@dataclass
class DivideConquerState:
    n: int


class DivideAndConquer(TwoPlayerEnv):
    GAME_ID = "divide-and-conquer"
    TITLE = "Divide and Conquer"
    ACTION_SPACE_SIZE = len(PRIMES)
    OBSERVATION_DIM = len(PRIMES)
    STOCHASTIC_SETUP = True

    def _setup(self, options: Dict[str, Any]) -> None:
        if "n" in options:
            n = int(options["n"])
            if n < 2 or not is_smooth(n):
                raise ContractError(f"divide-and-conquer: n must be >= 2 with prime factors <= 50, got {n}")
        else:
            n = self.rng.choice(STARTING_NUMBERS)
        self.state = DivideConquerState(n=n)

    def _legal_actions(self) -> List[int]:
        return [index for index, prime in enumerate(PRIMES) if self.state.n % prime == 0]

    def _apply(self, action: int) -> Outcome:
        self.state.n //= PRIMES[action]
        return Outcome.MOVER_WINS if self.state.n == 1 else Outcome.CONTINUE

    def _encode(self, seat: Seat) -> List[float]:
        n = self.state.n
        values = []
        for prime in PRIMES:
            exponent = 0
            while n % prime == 0:
                n //= prime
                exponent += 1
            values.append(min(exponent, MAX_EXPONENT) / MAX_EXPONENT)
        return values

    def _render_lines(self) -> List[str]:
        divisors = [str(PRIMES[index]) for index in self._legal_actions()] if self.state.n > 1 else []
        return [f"Number: {self.state.n}", f"Prime factors available: {', '.join(divisors) or 'none'}"]
