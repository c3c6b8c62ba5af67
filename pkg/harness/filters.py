"""
Quality filters for suite games and the beatable-opponent selection.

    keyword      the action map must not contain the literal ``**``
    execution    instantiate, check observation length, render, random play
    timeout      probe matches stay under the move cap, the wall budget and
                 a 20% error rate
    upper_bound  round-robin between checkpoints; keep the game only if some
                 pair has a winrate of at least 0.8, and use the losing
                 checkpoint of the most lopsided pair as the opponent
"""
import itertools
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from engine.core_env import ContractError, GameSpec, TwoPlayerEnv, wrap_move_cap
from harness.agents import Agent, MCTSAgent, PolicyAgent, RandomAgent
from harness.match import MatchOutcome, play_match
from rl.mcts import DEFAULT_ROLLOUTS
from rl.network import PolicyParams
from runtime.rng import SplitMix64, derive_seed

STAGES = ("keyword", "execution", "timeout", "upper_bound")
FORBIDDEN_TOKEN = "**"
MAX_ERROR_RATE = 0.2
DISPARITY_THRESHOLD = 0.8
DEFAULT_SELECTION_MATCHES = 6


@dataclass
class FilterReport:
    game_id: str
    stage: str
    passed: bool
    details: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.stage not in STAGES:
            raise ContractError(f"unknown filter stage {self.stage!r}")

    def to_dict(self) -> dict:
        return {"type": "filter", "game_id": self.game_id, "stage": self.stage, "passed": self.passed, "details": self.details}


@dataclass
class OpponentSelection:
    game_id: str
    opponent_checkpoint: int
    dominating_checkpoint: int
    disparity: float
    opponent_path: Optional[str] = None

    def to_dict(self) -> dict:
        payload = {
            "type": "selection",
            "game_id": self.game_id,
            "opponent_checkpoint": self.opponent_checkpoint,
            "dominating_checkpoint": self.dominating_checkpoint,
            "disparity": self.disparity,
        }
        if self.opponent_path:
            payload["opponent_path"] = self.opponent_path
        return payload

    @classmethod
    def from_dict(cls, payload: dict) -> "OpponentSelection":
        return cls(
            game_id=payload["game_id"],
            opponent_checkpoint=int(payload["opponent_checkpoint"]),
            dominating_checkpoint=int(payload["dominating_checkpoint"]),
            disparity=float(payload["disparity"]),
            opponent_path=payload.get("opponent_path"),
        )


def keyword_filter(action_map_text: str) -> bool:
    return FORBIDDEN_TOKEN not in action_map_text


def keyword_report(spec: GameSpec) -> FilterReport:
    passed = keyword_filter(spec.action_map_text)
    details = {} if passed else {"reason": f"action map contains {FORBIDDEN_TOKEN!r}"}
    return FilterReport(spec.id, "keyword", passed, details)


def _describe(exc: BaseException) -> str:
    return f"{type(exc).__name__}: {exc}"


def execution_filter(spec: GameSpec, make_env: Callable[[], TwoPlayerEnv], n_random_games: int = 100, seed: int = 0) -> FilterReport:
    def fail(reason: str, **extra) -> FilterReport:
        return FilterReport(spec.id, "execution", False, dict(extra, reason=reason))

    try:
        env = make_env()
        obs, _ = env.reset(seed=seed)
    except Exception as exc:  # noqa: BLE001 - any failure disqualifies the game
        return fail(f"instantiation failed: {_describe(exc)}")
    if np.shape(obs) != (spec.observation_dim,):
        return fail(f"observation shape {tuple(np.shape(obs))} does not match declared observation_dim {spec.observation_dim}")
    try:
        text = env.render()
    except Exception as exc:  # noqa: BLE001
        return fail(f"render failed: {_describe(exc)}")
    if not isinstance(text, str) or not text.strip():
        return fail("render returned no text")

    rng = SplitMix64(derive_seed(seed, 1))
    max_moves = 0
    for game in range(n_random_games):
        try:
            env = wrap_move_cap(make_env(), spec.move_cap)
            env.reset(seed=derive_seed(seed, 2, game))
            while not env.done:
                valid = env.valid_moves()
                if not valid:
                    return fail(f"game {game}: no valid moves in a non-terminal state", games_played=game)
                outcome = env.step(rng.choice(valid))
                if outcome.info.get("invalid_action"):
                    return fail(f"game {game}: a move from valid_moves was rejected as invalid", games_played=game)
                if np.shape(outcome.observation) != (spec.observation_dim,):
                    return fail(f"game {game}: observation shape changed to {tuple(np.shape(outcome.observation))}", games_played=game)
            max_moves = max(max_moves, env.move_count)
        except Exception as exc:  # noqa: BLE001
            return fail(f"game {game}: {_describe(exc)}", games_played=game)
    return FilterReport(spec.id, "execution", True, {"games_played": n_random_games, "max_moves": max_moves})


def timeout_filter(
    spec: GameSpec,
    make_env: Callable[[], TwoPlayerEnv],
    probe_agent: Callable[[], Agent] = RandomAgent,
    n_games: int = 10,
    move_cap: int = 100,
    wall_budget: float = 60.0,
    seed: int = 0,
    seeds: Optional[Sequence[int]] = None,
) -> FilterReport:
    """Wall clock is only recorded when it is the reason for failing, so reruns give identical reports."""
    seeds = list(seeds) if seeds is not None else [derive_seed(seed, game) for game in range(n_games)]
    started = time.monotonic()
    errors = 0
    capped = 0
    max_moves = 0
    played = 0
    over_budget = False
    for index, game_seed in enumerate(seeds):
        record = play_match(probe_agent(), probe_agent(), make_env, game_seed, first_seat="A" if index % 2 == 0 else "B", move_cap=move_cap)
        played += 1
        max_moves = max(max_moves, record.move_count)
        if record.engine_error:
            errors += 1
        elif record.outcome is MatchOutcome.DRAW and record.move_count >= move_cap:
            capped += 1
        if time.monotonic() - started > wall_budget:
            over_budget = True
            break

    error_rate = errors / played if played else 0.0
    details: Dict[str, Any] = {"games_played": played, "max_moves": max_moves, "exception_rate": round(error_rate, 6)}
    reasons = []
    if capped:
        reasons.append(f"{capped} probe game(s) reached the {move_cap}-move cap")
    if over_budget:
        details["wall_clock"] = round(time.monotonic() - started, 3)
        reasons.append(f"wall clock exceeded the {wall_budget:g}s budget")
    if error_rate > MAX_ERROR_RATE:
        reasons.append(f"exception rate {error_rate:.0%} exceeds {MAX_ERROR_RATE:.0%}")
    if reasons:
        details["reason"] = "; ".join(reasons)
    return FilterReport(spec.id, "timeout", not reasons, details)


def pick_opponent(timesteps: Sequence[int], wins: Sequence[Sequence[int]], n_matches: int) -> Tuple[Optional[Tuple[int, int]], float]:
    """
    ``wins[i][j]`` is how many of the pair's matches checkpoint i won against j.
    Returns ((loser_index, winner_index) or None, best disparity). Ties keep the
    first pair in enumeration order.
    """
    best: Optional[Tuple[int, int]] = None
    best_rate = -1.0
    for i, j in itertools.combinations(range(len(timesteps)), 2):
        if wins[i][j] >= wins[j][i]:
            winner, loser = i, j
        else:
            winner, loser = j, i
        rate = wins[winner][loser] / n_matches
        if rate > best_rate:
            best, best_rate = (loser, winner), rate
    if best is None or best_rate < DISPARITY_THRESHOLD:
        return None, max(best_rate, 0.0)
    return best, best_rate


@dataclass
class SelectionResult:
    report: FilterReport
    selection: Optional[OpponentSelection]
    matrix: List[List[float]]


def select_benchmark_opponent(
    spec: GameSpec,
    checkpoints: Sequence[Tuple[int, PolicyParams]],
    make_env: Callable[[], TwoPlayerEnv],
    n_matches: int = DEFAULT_SELECTION_MATCHES,
    use_mcts: bool = True,
    n_rollouts: int = DEFAULT_ROLLOUTS,
    move_cap: int = 100,
    seed: int = 0,
) -> SelectionResult:
    if len(checkpoints) < 2:
        raise ContractError(f"upper-bound selection needs at least 2 checkpoints, got {len(checkpoints)}")
    if n_matches < 2 or n_matches % 2:
        raise ContractError("n_matches must be a positive even number so seats split evenly")

    def make_agent(params: PolicyParams, timestep: int) -> Agent:
        if use_mcts:
            return MCTSAgent(params, source=f"ckpt-{timestep}", n_rollouts=n_rollouts, move_cap=move_cap)
        return PolicyAgent(params, source=f"ckpt-{timestep}")

    timesteps = [timestep for timestep, _ in checkpoints]
    size = len(checkpoints)
    wins = [[0] * size for _ in range(size)]
    for i, j in itertools.combinations(range(size), 2):
        (ti, pi), (tj, pj) = checkpoints[i], checkpoints[j]
        for game in range(n_matches):
            first = "A" if game % 2 == 0 else "B"
            record = play_match(make_agent(pi, ti), make_agent(pj, tj), make_env, derive_seed(seed, i, j, game), first_seat=first, move_cap=move_cap)
            if record.outcome is MatchOutcome.WIN_A:
                wins[i][j] += 1
            elif record.outcome is MatchOutcome.WIN_B:
                wins[j][i] += 1

    matrix = [[round(wins[i][j] / n_matches, 6) for j in range(size)] for i in range(size)]
    pair, disparity = pick_opponent(timesteps, wins, n_matches)
    details: Dict[str, Any] = {"winrate_matrix": matrix, "checkpoints": timesteps, "disparity": round(disparity, 6)}
    if pair is None:
        details["reason"] = f"no checkpoint pair reaches a {DISPARITY_THRESHOLD:.0%} winrate (best {disparity:.3f})"
        return SelectionResult(FilterReport(spec.id, "upper_bound", False, details), None, matrix)
    loser, winner = pair
    selection = OpponentSelection(spec.id, timesteps[loser], timesteps[winner], round(disparity, 6))
    details.update(opponent_checkpoint=timesteps[loser], dominating_checkpoint=timesteps[winner])
    return SelectionResult(FilterReport(spec.id, "upper_bound", True, details), selection, matrix)
