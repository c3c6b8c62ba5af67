"""Prime Claim: claim numbers 1..25 in turn; composites also gift their proper-divisor sum to the rival."""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Set

from engine.core_env import ContractError, Outcome, Seat, TwoPlayerEnv

MAX_NUMBER = 25


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, int(n ** 0.5) + 1))


def proper_divisor_sum(n: int) -> int:
    return sum(d for d in range(1, n) if n % d == 0)


def claim_points(n: int) -> "tuple[int, int]":
    """(points to the claimer, points gifted to the rival)."""
    if n == 1 or is_prime(n):
        return n, 0
    return n, proper_divisor_sum(n)


SCORE_SCALE = sum(sum(claim_points(n)) for n in range(1, MAX_NUMBER + 1))


@dataclass
class PrimeClaimState:
    unclaimed: Set[int] = field(default_factory=lambda: set(range(1, MAX_NUMBER + 1)))
    p1_score: int = 0
    p2_score: int = 0
    last_picker: Optional[int] = None

    def score(self, seat: Seat) -> int:
        return self.p1_score if seat is Seat.P1 else self.p2_score

    def add(self, seat: Seat, points: int) -> None:
        if seat is Seat.P1:
            self.p1_score += points
        else:
            self.p2_score += points


class PrimeClaim(TwoPlayerEnv):
    GAME_ID = "prime-claim"
    TITLE = "Prime Claim"
    ACTION_SPACE_SIZE = MAX_NUMBER
    OBSERVATION_DIM = MAX_NUMBER + 2

    def _setup(self, options: Dict[str, Any]) -> None:
        state = PrimeClaimState()
        if "unclaimed" in options:
            state.unclaimed = {int(n) for n in options["unclaimed"]}
            if not state.unclaimed or not state.unclaimed <= set(range(1, MAX_NUMBER + 1)):
                raise ContractError(f"prime-claim: unclaimed must be a non-empty subset of 1..{MAX_NUMBER}")
        state.p1_score = int(options.get("p1_score", 0))
        state.p2_score = int(options.get("p2_score", 0))
        self.state = state

    def _legal_actions(self) -> List[int]:
        return sorted(n - 1 for n in self.state.unclaimed)

    def _apply(self, action: int) -> Outcome:
        mover = self.current_player
        number = action + 1
        own, gift = claim_points(number)
        self.state.unclaimed.discard(number)
        self.state.add(mover, own)
        self.state.add(mover.other, gift)
        self.state.last_picker = int(mover)
        if self.state.unclaimed:
            return Outcome.CONTINUE
        # ties go to the last picker, who is the mover
        if self.state.score(mover) >= self.state.score(mover.other):
            return Outcome.MOVER_WINS
        return Outcome.MOVER_LOSES

    def _encode(self, seat: Seat) -> List[float]:
        values = [1.0 if n in self.state.unclaimed else 0.0 for n in range(1, MAX_NUMBER + 1)]
        values.append(min(self.state.score(seat) / SCORE_SCALE, 1.0))
        values.append(min(self.state.score(seat.other) / SCORE_SCALE, 1.0))
        return values

    def _render_lines(self) -> List[str]:
        unclaimed = " ".join(str(n) for n in sorted(self.state.unclaimed)) or "none"
        return [
            f"Unclaimed: {unclaimed}",
            f"Scores: Player 1 = {self.state.p1_score}, Player 2 = {self.state.p2_score}",
        ]
