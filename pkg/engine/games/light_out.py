"""Light Out Duel: seven lights in a row; turn off one light or two adjacent lit lights; last light off wins."""
from dataclasses import dataclass, field
from typing import Any, Dict, List

from engine.core_env import ContractError, Outcome, Seat, TwoPlayerEnv

N_LIGHTS = 7


def decode_action(action: int) -> List[int]:
    """0-based light indices switched off by an action index."""
    if action < N_LIGHTS:
        return [action]
    start = action - N_LIGHTS
    return [start, start + 1]


@dataclass
class LightOutState:
    lights: List[bool] = field(default_factory=lambda: [True] * N_LIGHTS)


class LightOutDuel(TwoPlayerEnv):
    GAME_ID = "light-out-duel"
    TITLE = "Light Out Duel"
    ACTION_SPACE_SIZE = 2 * N_LIGHTS - 1
    OBSERVATION_DIM = N_LIGHTS

    def _setup(self, options: Dict[str, Any]) -> None:
        lights = [True] * N_LIGHTS
        if "lights_on" in options:
            on = {int(number) for number in options["lights_on"]}
            if not on or not on <= set(range(1, N_LIGHTS + 1)):
                raise ContractError(f"light-out-duel: lights_on must be a non-empty subset of 1..{N_LIGHTS}")
            lights = [number in on for number in range(1, N_LIGHTS + 1)]
        self.state = LightOutState(lights=lights)

    def _legal_actions(self) -> List[int]:
        return [action for action in range(self.ACTION_SPACE_SIZE) if all(self.state.lights[i] for i in decode_action(action))]

    def _apply(self, action: int) -> Outcome:
        for index in decode_action(action):
            self.state.lights[index] = False
        return Outcome.CONTINUE if any(self.state.lights) else Outcome.MOVER_WINS

    def _encode(self, seat: Seat) -> List[float]:
        return [1.0 if lit else 0.0 for lit in self.state.lights]

    def _render_lines(self) -> List[str]:
        row = " ".join(f"{number}:{'on' if lit else 'off'}" for number, lit in enumerate(self.state.lights, start=1))
        return [f"Lights: {row}", f"Lights on: {sum(self.state.lights)}"]
