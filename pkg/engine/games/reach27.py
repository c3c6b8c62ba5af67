"""Reach 27: players alternately add 1..9 to a shared total; hitting 27 exactly wins, passing it loses."""
from dataclasses import dataclass
from typing import Any, Dict, List

from engine.core_env import ContractError, Outcome, Seat, TwoPlayerEnv

TARGET = 27


@dataclass
class Reach27State:
    total: int = 0


class Reach27(TwoPlayerEnv):
    GAME_ID = "reach27"
    TITLE = "Reach 27"
    ACTION_SPACE_SIZE = 9
    OBSERVATION_DIM = 2

    def _setup(self, options: Dict[str, Any]) -> None:
        total = int(options.get("total", 0))
        if not 0 <= total < TARGET:
            raise ContractError(f"reach27: starting total must be in [0, {TARGET - 1}], got {total}")
        self.state = Reach27State(total=total)

    def _legal_actions(self) -> List[int]:
        return list(range(self.ACTION_SPACE_SIZE))

    def _apply(self, action: int) -> Outcome:
        self.state.total += action + 1
        if self.state.total == TARGET:
            return Outcome.MOVER_WINS
        if self.state.total > TARGET:
            return Outcome.MOVER_LOSES
        return Outcome.CONTINUE

    def _encode(self, seat: Seat) -> List[float]:
        # second component: parity of the distance left, identical for both seats
        total = min(self.state.total, TARGET)
        return [total / TARGET, float((TARGET - total) % 2)]

    def _render_lines(self) -> List[str]:
        return [f"Total: {self.state.total}", f"Target: {TARGET}"]
