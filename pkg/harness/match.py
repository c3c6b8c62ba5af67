"""
Referee loop for one match between two agents.

Agent A and agent B are labels; ``first_seat`` says which of them plays as
Player 1. Outcomes are always expressed in A/B terms so a report can be
recomputed under either seating convention.

An EnvError is flagged ``engine_error`` only when the environment itself
failed. Agent-side aborts (a process that cannot be spawned, a checkpoint
that does not fit the game, a human quitting) are EnvErrors that still
count as played matches.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple

from engine.core_env import DEFAULT_MOVE_CAP, ContractError, Seat, TwoPlayerEnv, wrap_move_cap
from harness.agents import Agent, AgentFault, AgentLaunchError, MatchAborted
from runtime.rng import derive_seed

SCHEMA_VERSION = "1.0"
SEATS = ("A", "B")


class MatchOutcome(str, Enum):
    WIN_A = "WinA"
    WIN_B = "WinB"
    DRAW = "Draw"
    FAULT_A = "FaultA"
    FAULT_B = "FaultB"
    ENV_ERROR = "EnvError"


@dataclass
class MatchRecord:
    game_id: str
    agent_a: str
    agent_b: str
    first_seat: str
    seed: int
    moves: List[Tuple[int, int]] = field(default_factory=list)
    outcome: MatchOutcome = MatchOutcome.DRAW
    reprompts: Dict[str, int] = field(default_factory=lambda: {"A": 0, "B": 0})
    detail: Optional[str] = None
    engine_error: bool = False

    @property
    def move_count(self) -> int:
        return len(self.moves)

    def result_for(self, label: str) -> str:
        """win / loss / draw / fault / env_error from one agent's point of view."""
        other = "B" if label == "A" else "A"
        if self.outcome is MatchOutcome.ENV_ERROR:
            return "env_error"
        if self.outcome is MatchOutcome.DRAW:
            return "draw"
        if self.outcome.value == f"Win{label}":
            return "win"
        if self.outcome.value == f"Fault{label}":
            return "fault"
        if self.outcome.value in (f"Win{other}", f"Fault{other}"):
            return "loss"
        raise ValueError(f"unhandled outcome {self.outcome}")

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "game_id": self.game_id,
            "agent_a": self.agent_a,
            "agent_b": self.agent_b,
            "first_seat": self.first_seat,
            "moves": [[seat, action] for seat, action in self.moves],
            "outcome": self.outcome.value,
            "move_count": self.move_count,
            "seed": self.seed,
            "reprompts": dict(self.reprompts),
            "detail": self.detail,
            "engine_error": self.engine_error,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "MatchRecord":
        return cls(
            game_id=payload["game_id"],
            agent_a=payload["agent_a"],
            agent_b=payload["agent_b"],
            first_seat=payload["first_seat"],
            seed=int(payload["seed"]),
            moves=[(int(seat), int(action)) for seat, action in payload["moves"]],
            outcome=MatchOutcome(payload["outcome"]),
            reprompts=dict(payload.get("reprompts") or {"A": 0, "B": 0}),
            detail=payload.get("detail"),
            engine_error=bool(payload.get("engine_error", False)),
        )


def _seat_labels(first_seat: str) -> Dict[Seat, str]:
    if first_seat not in SEATS:
        raise ValueError(f"first_seat must be 'A' or 'B', got {first_seat!r}")
    second = "B" if first_seat == "A" else "A"
    return {Seat.P1: first_seat, Seat.P2: second}


def play_match(
    agent_a: Agent,
    agent_b: Agent,
    make_env: Callable[[], TwoPlayerEnv],
    seed: int,
    first_seat: str = "A",
    move_cap: int = DEFAULT_MOVE_CAP,
) -> MatchRecord:
    labels = _seat_labels(first_seat)
    agents = {"A": agent_a, "B": agent_b}
    record = MatchRecord(game_id="", agent_a=agent_a.descriptor, agent_b=agent_b.descriptor, first_seat=first_seat, seed=seed)
    try:
        env = wrap_move_cap(make_env(), move_cap)
        env.reset(seed=seed)
        record.game_id = env.game_spec.id
    except Exception as exc:  # noqa: BLE001 - engine failure is reported as EnvError
        record.outcome, record.detail = MatchOutcome.ENV_ERROR, f"environment setup failed: {type(exc).__name__}: {exc}"
        record.engine_error = True
        return record

    started: List[Agent] = []
    try:
        for key, agent in agents.items():
            try:
                agent.start(env.game_spec, derive_seed(seed, SEATS.index(key) + 1))
                started.append(agent)
            except AgentFault as exc:
                record.outcome, record.detail = MatchOutcome(f"Fault{key}"), str(exc)
                return record
            except (AgentLaunchError, ContractError) as exc:
                record.outcome, record.detail = MatchOutcome.ENV_ERROR, f"agent {key} launch failed: {exc}"
                return record
        _referee(env, agents, labels, record)
        return record
    finally:
        for agent in started:
            agent.close()


def _referee(env, agents: Dict[str, Agent], labels: Dict[Seat, str], record: MatchRecord) -> None:
    while True:
        seat = env.current_player
        label = labels[seat]
        agent = agents[label]
        try:
            action = agent.choose(env)
        except AgentFault as exc:
            record.reprompts[label] += max(exc.attempts - 1, 0)
            record.outcome, record.detail = MatchOutcome(f"Fault{label}"), str(exc)
            return
        except MatchAborted as exc:
            record.outcome, record.detail = MatchOutcome.ENV_ERROR, f"match aborted: {exc}"
            return
        record.reprompts[label] += agent.last_reprompts
        if action not in env.valid_moves():
            record.outcome, record.detail = MatchOutcome(f"Fault{label}"), f"illegal move {action!r}"
            return
        try:
            outcome = env.step(action)
        except Exception as exc:  # noqa: BLE001 - engine failure is reported as EnvError
            record.moves.append((int(seat), int(action)))
            record.outcome, record.detail = MatchOutcome.ENV_ERROR, f"{type(exc).__name__}: {exc}"
            record.engine_error = True
            return
        record.moves.append((int(seat), int(action)))
        if outcome.truncated:
            record.outcome, record.detail = MatchOutcome.DRAW, f"move cap {env.cap} reached"
            return
        if outcome.terminated:
            if env.winner is None:
                record.outcome = MatchOutcome.DRAW
            else:
                record.outcome = MatchOutcome(f"Win{labels[env.winner]}")
            return
