"""
Environment contract shared by every game in the suite.

A game is a gymnasium environment with a Discrete action space and a Box
observation space, plus a ``valid_moves`` function. The environment switches
the current player internally; rewards are always reported from the point of
view of the player who just moved:

    +1   the mover won          -1   the mover lost
     0   game continues / draw  -10  the mover played an invalid action

Observations are always encoded for the player whose turn it is next, so the
same position looks the same to whichever seat has to move.
"""
import copy
import dataclasses
import re
from enum import Enum, IntEnum
from typing import Any, Dict, Hashable, List, NamedTuple, Optional

import gymnasium as gym
import numpy as np
from gymnasium import spaces

from runtime.rng import SplitMix64

WIN_REWARD = 1.0
LOSS_REWARD = -1.0
DRAW_REWARD = 0.0
INVALID_ACTION_REWARD = -10.0
DEFAULT_MOVE_CAP = 100

_ACTION_LINE = re.compile(r"^\s*-\s*`(\d+)`\s*:\s*(.+?)\s*$")


class SuiteError(ValueError):
    pass


class ContractError(ValueError):
    pass


class GameOverError(RuntimeError):
    pass


class Seat(IntEnum):
    P1 = 1
    P2 = 2

    @property
    def other(self) -> "Seat":
        return Seat.P2 if self is Seat.P1 else Seat.P1

    @property
    def label(self) -> str:
        return f"Player {int(self)}"


class Outcome(Enum):
    CONTINUE = "continue"
    MOVER_WINS = "mover_wins"
    MOVER_LOSES = "mover_loses"
    DRAW = "draw"


@dataclasses.dataclass(frozen=True)
class GameSpec:
    id: str
    title: str
    rulebook_text: str
    action_map_text: str
    action_space_size: int
    observation_dim: int
    move_cap: int = DEFAULT_MOVE_CAP
    stochastic_setup: bool = False
    entry: Optional[str] = None
    observation_doc: str = ""

    def __post_init__(self):
        if not self.rulebook_text.strip() or not self.action_map_text.strip():
            raise ContractError(f"game {self.id}: rulebook and action map must be non-empty")
        for name in ("action_space_size", "observation_dim", "move_cap"):
            if int(getattr(self, name)) < 1:
                raise ContractError(f"game {self.id}: {name} must be positive")

    def action_labels(self) -> Dict[int, str]:
        """Per-index move descriptions parsed from the action map's "- `i`: ..." lines."""
        labels: Dict[int, str] = {}
        for line in self.action_map_text.splitlines():
            match = _ACTION_LINE.match(line)
            if match:
                labels[int(match.group(1))] = match.group(2)
        return labels


class StepOutcome(NamedTuple):
    observation: np.ndarray
    reward: float
    terminated: bool
    truncated: bool
    info: Dict[str, Any]


def _freeze(value: Any) -> Hashable:
    if isinstance(value, (list, tuple)):
        return tuple(_freeze(item) for item in value)
    if isinstance(value, (set, frozenset)):
        return frozenset(value)
    if isinstance(value, dict):
        return tuple(sorted((key, _freeze(item)) for key, item in value.items()))
    return value


class TwoPlayerEnv(gym.Env):
    """
    Base class for the suite. Subclasses keep all mutable game data in
    ``self.state`` (a dataclass) and implement the hooks below.
    """

    metadata = {"render_modes": ["ansi"]}

    GAME_ID = ""
    TITLE = ""
    ACTION_SPACE_SIZE = 1
    OBSERVATION_DIM = 1
    STOCHASTIC_SETUP = False

    def __init__(self, game_spec: Optional[GameSpec] = None):
        super().__init__()
        self.game_spec = game_spec or self._placeholder_spec()
        self.render_mode = "ansi"
        self.action_space = spaces.Discrete(self.ACTION_SPACE_SIZE)
        self.observation_space = spaces.Box(low=0.0, high=1.0, shape=(self.OBSERVATION_DIM,), dtype=np.float32)
        self.rng = SplitMix64(0)
        self.state: Any = None
        self.current_player = Seat.P1
        self.move_count = 0
        self.done = False
        self.winner: Optional[Seat] = None
        self.reset()

    def _placeholder_spec(self) -> GameSpec:
        title = self.TITLE or type(self).__name__
        return GameSpec(
            id=self.GAME_ID or type(self).__name__.lower(),
            title=title,
            rulebook_text=title,
            action_map_text=title,
            action_space_size=self.ACTION_SPACE_SIZE,
            observation_dim=self.OBSERVATION_DIM,
            stochastic_setup=self.STOCHASTIC_SETUP,
        )

    # -- hooks -----------------------------------------------------------------

    def _setup(self, options: Dict[str, Any]) -> None:
        raise NotImplementedError

    def _legal_actions(self) -> List[int]:
        raise NotImplementedError

    def _apply(self, action: int) -> Outcome:
        raise NotImplementedError

    def _encode(self, seat: Seat) -> List[float]:
        raise NotImplementedError

    def _render_lines(self) -> List[str]:
        raise NotImplementedError

    def _next_player(self, mover: Seat) -> Seat:
        return mover.other

    # -- contract --------------------------------------------------------------

    def reset(self, *, seed: Optional[int] = None, options: Optional[Dict[str, Any]] = None):
        super().reset(seed=seed)
        if seed is not None:
            self.rng = SplitMix64(seed)
        options = dict(options or {})
        self.current_player = Seat(int(options.pop("current_player", Seat.P1)))
        self.move_count = 0
        self.done = False
        self.winner = None
        self._setup(options)
        return self.observation(), {}

    def step(self, action) -> StepOutcome:
        if self.done:
            raise GameOverError(f"{self.game_spec.id}: step called on a finished game")
        mover = self.current_player
        self.move_count += 1
        try:
            index = int(action)
        except (TypeError, ValueError):
            index = -1
        if index not in self._legal_actions():
            self.done = True
            self.winner = mover.other
            return StepOutcome(self.observation(), INVALID_ACTION_REWARD, True, False, self._info(mover, invalid=True))

        outcome = self._apply(index)
        reward = DRAW_REWARD
        if outcome is Outcome.MOVER_WINS:
            self.done, self.winner, reward = True, mover, WIN_REWARD
        elif outcome is Outcome.MOVER_LOSES:
            self.done, self.winner, reward = True, mover.other, LOSS_REWARD
        elif outcome is Outcome.DRAW:
            self.done = True
        if not self.done:
            self.current_player = self._next_player(mover)
        return StepOutcome(self.observation(), reward, self.done, False, self._info(mover))

    def render(self) -> str:
        lines = list(self._render_lines())
        if self.done:
            lines.append(f"Game over: {self.winner.label} wins" if self.winner else "Game over: draw")
        else:
            lines.append(f"Current player: {self.current_player.label}")
        return "\n".join(lines)

    def valid_moves(self) -> List[int]:
        if self.done:
            return []
        return list(self._legal_actions())

    def observation(self) -> np.ndarray:
        return np.asarray(self._encode(self.current_player), dtype=np.float32)

    def clone(self) -> "TwoPlayerEnv":
        twin = copy.copy(self)
        twin.state = copy.deepcopy(self.state)
        twin.rng = self.rng.copy()
        return twin

    def state_key(self) -> Hashable:
        return (_freeze(dataclasses.astuple(self.state)), int(self.current_player), self.done)

    def _info(self, mover: Seat, invalid: bool = False) -> Dict[str, Any]:
        return {
            "mover": int(mover),
            "winner": int(self.winner) if self.winner else None,
            "invalid_action": invalid,
        }


class MoveCapWrapper(gym.Wrapper):
    """Truncates an episode (reward 0) once the move count reaches the cap without a result."""

    def __init__(self, env: TwoPlayerEnv, cap: int = DEFAULT_MOVE_CAP):
        if int(cap) < 1:
            raise ContractError("move cap must be at least 1")
        super().__init__(env)
        self.cap = int(cap)
        self.truncated = False

    @property
    def game_spec(self) -> GameSpec:
        return self.env.game_spec

    @property
    def current_player(self) -> Seat:
        return self.env.current_player

    @property
    def move_count(self) -> int:
        return self.env.move_count

    @property
    def done(self) -> bool:
        return self.env.done or self.truncated

    @property
    def winner(self) -> Optional[Seat]:
        return self.env.winner

    def reset(self, *, seed: Optional[int] = None, options: Optional[Dict[str, Any]] = None):
        self.truncated = False
        return self.env.reset(seed=seed, options=options)

    def step(self, action) -> StepOutcome:
        if self.truncated:
            raise GameOverError(f"{self.game_spec.id}: step called on a truncated game")
        outcome = self.env.step(action)
        if not outcome.terminated and self.env.move_count >= self.cap:
            self.truncated = True
            info = dict(outcome.info, truncated_at=self.cap)
            return StepOutcome(outcome.observation, DRAW_REWARD, False, True, info)
        return outcome

    def render(self) -> str:
        text = self.env.render()
        if self.truncated:
            text += f"\nGame stopped at the {self.cap}-move cap: draw"
        return text

    def valid_moves(self) -> List[int]:
        return [] if self.truncated else self.env.valid_moves()

    def observation(self) -> np.ndarray:
        return self.env.observation()

    def state_key(self) -> Hashable:
        return (self.env.state_key(), self.truncated)

    def clone(self) -> "MoveCapWrapper":
        twin = MoveCapWrapper(self.env.clone(), self.cap)
        twin.truncated = self.truncated
        return twin


def wrap_move_cap(env: TwoPlayerEnv, cap: int) -> MoveCapWrapper:
    return MoveCapWrapper(env, cap)
