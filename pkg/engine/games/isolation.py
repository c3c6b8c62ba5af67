"""Isolation: claim squares on a 13-square line that are not next to any claimed square; leave the rival stuck to win."""
from dataclasses import dataclass, field
from typing import Any, Dict, List

from engine.core_env import ContractError, Outcome, Seat, TwoPlayerEnv

N_SQUARES = 13


@dataclass
class IsolationState:
    claimed: List[bool] = field(default_factory=lambda: [False] * N_SQUARES)


def claimable(claimed: List[bool]) -> List[int]:
    squares = []
    for index in range(len(claimed)):
        if claimed[index]:
            continue
        if index > 0 and claimed[index - 1]:
            continue
        if index + 1 < len(claimed) and claimed[index + 1]:
            continue
        squares.append(index)
    return squares


class Isolation(TwoPlayerEnv):
    GAME_ID = "isolation"
    TITLE = "Isolation"
    ACTION_SPACE_SIZE = N_SQUARES
    OBSERVATION_DIM = N_SQUARES

    def _setup(self, options: Dict[str, Any]) -> None:
        state = IsolationState()
        for index in options.get("claimed", ()):
            state.claimed[int(index)] = True
        if not claimable(state.claimed):
            raise ContractError("isolation: starting position has no claimable square")
        self.state = state

    def _legal_actions(self) -> List[int]:
        return claimable(self.state.claimed)

    def _apply(self, action: int) -> Outcome:
        self.state.claimed[action] = True
        return Outcome.CONTINUE if claimable(self.state.claimed) else Outcome.MOVER_WINS

    def _encode(self, seat: Seat) -> List[float]:
        return [1.0 if taken else 0.0 for taken in self.state.claimed]

    def _render_lines(self) -> List[str]:
        squares = " ".join("#" if taken else "." for taken in self.state.claimed)
        indices = " ".join(str(index % 10) for index in range(N_SQUARES))
        return [f"Line:    {squares}", f"Squares: {indices}", f"Claimable: {' '.join(map(str, claimable(self.state.claimed))) or 'none'}"]
