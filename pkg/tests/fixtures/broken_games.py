"""Games that the quality filters must reject, loaded through ``entry = tests.fixtures.broken_games:<Class>``."""
from dataclasses import dataclass
from typing import Any, Dict, List

from engine.core_env import Outcome, Seat, TwoPlayerEnv
from engine.games.reach27 import Reach27


class WrongObservation(Reach27):
    """Declares three observation slots but encodes two."""

    GAME_ID = "wrong-observation"
    OBSERVATION_DIM = 3


class StepRaises(Reach27):
    GAME_ID = "step-raises"

    def _apply(self, action: int) -> Outcome:
        if self.state.total >= 10:
            raise RuntimeError("scoring table overflow")
        return super()._apply(action)


@dataclass
class CounterState:
    moves: int = 0


class NeverEnding(TwoPlayerEnv):
    """Two moves that never change the outcome; only the move cap ends a game."""

    GAME_ID = "never-ending"
    ACTION_SPACE_SIZE = 2
    OBSERVATION_DIM = 1

    def _setup(self, options: Dict[str, Any]) -> None:
        self.state = CounterState()

    def _legal_actions(self) -> List[int]:
        return [0, 1]

    def _apply(self, action: int) -> Outcome:
        self.state.moves += 1
        return Outcome.CONTINUE

    def _encode(self, seat: Seat) -> List[float]:
        return [float(self.state.moves % 2)]

    def _render_lines(self) -> List[str]:
        return [f"Moves so far: {self.state.moves}"]


class SeedFlaky(Reach27):
    """Raises on the first step whenever the reset seed ends in 0, 1 or 2."""

    GAME_ID = "seed-flaky"

    def reset(self, *, seed=None, options=None):
        self.flaky = seed is not None and seed % 10 < 3
        return super().reset(seed=seed, options=options)

    def _apply(self, action: int) -> Outcome:
        if self.flaky:
            raise RuntimeError("lookup table missing for this seed")
        return super()._apply(action)
