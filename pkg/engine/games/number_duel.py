"""
Number Duel.

Each player owns the numbers 1..N. Every round one player attacks and the
other defends: the attacker commits a number (hidden from the defender), then
the defender answers with one of theirs. A strictly larger attack captures the
defender's number; otherwise the attacker's number is captured. Roles swap
after each round, so the defender of one round opens the next one as attacker.
A player whose numbers are all captured loses.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Set

from engine.core_env import ContractError, GameSpec, Outcome, Seat, TwoPlayerEnv

DEFAULT_N = 10


@dataclass
class NumberDuelState:
    p1_set: Set[int] = field(default_factory=set)
    p2_set: Set[int] = field(default_factory=set)
    attacker: int = 1
    pending_attack: Optional[int] = None

    def numbers(self, seat: Seat) -> Set[int]:
        return self.p1_set if seat is Seat.P1 else self.p2_set


class NumberDuel(TwoPlayerEnv):
    GAME_ID = "number-duel"
    TITLE = "Number Duel"
    ACTION_SPACE_SIZE = DEFAULT_N
    OBSERVATION_DIM = 2 * DEFAULT_N + 1

    def __init__(self, game_spec: Optional[GameSpec] = None, n: int = DEFAULT_N):
        if n < 1:
            raise ContractError("number-duel: N must be positive")
        self.n = n
        self.ACTION_SPACE_SIZE = n
        self.OBSERVATION_DIM = 2 * n + 1
        super().__init__(game_spec)

    def _setup(self, options: Dict[str, Any]) -> None:
        full = set(range(1, self.n + 1))
        p1 = set(int(x) for x in options.get("p1_set", full))
        p2 = set(int(x) for x in options.get("p2_set", full))
        if not p1 or not p2 or not (p1 | p2) <= full:
            raise ContractError(f"number-duel: starting sets must be non-empty subsets of 1..{self.n}")
        self.state = NumberDuelState(p1_set=p1, p2_set=p2, attacker=int(self.current_player))

    def mover_is_attacker(self) -> bool:
        return self.state.pending_attack is None

    def _legal_actions(self) -> List[int]:
        return sorted(number - 1 for number in self.state.numbers(self.current_player))

    def _apply(self, action: int) -> Outcome:
        pick = action + 1
        if self.state.pending_attack is None:
            self.state.pending_attack = pick
            return Outcome.CONTINUE

        defender = self.current_player
        attacker = defender.other
        attack = self.state.pending_attack
        if attack > pick:
            self.state.numbers(defender).discard(pick)
        else:
            self.state.numbers(attacker).discard(attack)
        self.state.pending_attack = None
        self.state.attacker = int(defender)
        if not self.state.numbers(defender):
            return Outcome.MOVER_LOSES
        if not self.state.numbers(attacker):
            return Outcome.MOVER_WINS
        return Outcome.CONTINUE

    def _next_player(self, mover: Seat) -> Seat:
        # after a round resolves the defender stays on move as the new attacker
        return mover.other if self.state.pending_attack is not None else mover

    def _encode(self, seat: Seat) -> List[float]:
        own = self.state.numbers(seat)
        rival = self.state.numbers(seat.other)
        values = [1.0 if number in own else 0.0 for number in range(1, self.n + 1)]
        values += [1.0 if number in rival else 0.0 for number in range(1, self.n + 1)]
        values.append(1.0 if self.mover_is_attacker() else 0.0)
        return values

    def _render_lines(self) -> List[str]:
        lines = [
            f"Player 1 numbers: {' '.join(map(str, sorted(self.state.p1_set))) or 'none'}",
            f"Player 2 numbers: {' '.join(map(str, sorted(self.state.p2_set))) or 'none'}",
        ]
        if not self.done:
            lines.append(f"Current role: {'Attacker' if self.mover_is_attacker() else 'Defender'}")
            if self.state.pending_attack is not None:
                lines.append("The attacker has committed a hidden number.")
        return lines
