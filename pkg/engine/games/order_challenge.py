"""Order Challenge: pick from a shared pool 1..9, each pick larger than your own previous one; a player left without a pick loses."""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Set

from engine.core_env import ContractError, Outcome, Seat, TwoPlayerEnv

POOL_SIZE = 9


@dataclass
class OrderChallengeState:
    pool: Set[int] = field(default_factory=lambda: set(range(1, POOL_SIZE + 1)))
    p1_last: int = 0
    p2_last: int = 0

    def last(self, seat: Seat) -> int:
        return self.p1_last if seat is Seat.P1 else self.p2_last


class OrderChallenge(TwoPlayerEnv):
    GAME_ID = "order-challenge"
    TITLE = "Order Challenge"
    ACTION_SPACE_SIZE = POOL_SIZE
    OBSERVATION_DIM = POOL_SIZE + 2

    def _setup(self, options: Dict[str, Any]) -> None:
        state = OrderChallengeState()
        if "pool" in options:
            state.pool = {int(n) for n in options["pool"]}
        state.p1_last = int(options.get("p1_last", 0))
        state.p2_last = int(options.get("p2_last", 0))
        if not state.pool <= set(range(1, POOL_SIZE + 1)):
            raise ContractError(f"order-challenge: pool must be a subset of 1..{POOL_SIZE}")
        self.state = state
        if not self._picks_for(self.current_player):
            raise ContractError("order-challenge: starting player has no legal pick")

    def _picks_for(self, seat: Seat) -> List[int]:
        floor = self.state.last(seat)
        return sorted(n - 1 for n in self.state.pool if n > floor)

    def _legal_actions(self) -> List[int]:
        return self._picks_for(self.current_player)

    def _apply(self, action: int) -> Outcome:
        mover = self.current_player
        pick = action + 1
        self.state.pool.discard(pick)
        if mover is Seat.P1:
            self.state.p1_last = pick
        else:
            self.state.p2_last = pick
        return Outcome.CONTINUE if self._picks_for(mover.other) else Outcome.MOVER_WINS

    def _encode(self, seat: Seat) -> List[float]:
        values = [1.0 if n in self.state.pool else 0.0 for n in range(1, POOL_SIZE + 1)]
        values += [self.state.last(seat) / POOL_SIZE, self.state.last(seat.other) / POOL_SIZE]
        return values

    def _render_lines(self) -> List[str]:
        def shown(value: int) -> str:
            return str(value) if value else "-"

        return [
            f"Pool: {' '.join(map(str, sorted(self.state.pool))) or 'empty'}",
            f"Player 1 last pick: {shown(self.state.p1_last)}",
            f"Player 2 last pick: {shown(self.state.p2_last)}",
        ]
