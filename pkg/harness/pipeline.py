"""
The full suite pipeline: keyword -> execution -> timeout -> upper bound.

Each game runs the stages in order and stops at the first failure. Every
stage result is appended to ``pipeline/report.jsonl``; accepted games also
get ``pipeline/opponents/<game_id>.json`` naming the benchmark opponent.
A rejected game loses any opponent file left by an earlier run.
The last line of the report is a funnel summary.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

from engine.core_env import SuiteError
from engine.suite import GameSuite
from harness.filters import (
    STAGES,
    FilterReport,
    OpponentSelection,
    execution_filter,
    keyword_report,
    select_benchmark_opponent,
    timeout_filter,
)
from rl.checkpoint import list_checkpoints, load_checkpoint
from rl.ppo import PPOConfig
from rl.selfplay import TrainingSchedule, train_game
from runtime.artifact_store import ArtifactStore
from runtime.config import RunConfig
from runtime.rng import derive_seed, text_key

PIPELINE_PREFIX = "pipeline"
REPORT_KEY = f"{PIPELINE_PREFIX}/report.jsonl"


@dataclass
class GameResult:
    game_id: str
    reports: List[FilterReport] = field(default_factory=list)
    selection: Optional[OpponentSelection] = None

    @property
    def eligible(self) -> bool:
        return len(self.reports) == len(STAGES) and all(report.passed for report in self.reports)


@dataclass
class PipelineResult:
    games: List[GameResult]

    @property
    def eligible(self) -> List[str]:
        return [game.game_id for game in self.games if game.eligible]

    def summary(self) -> dict:
        funnel = {"entered": len(self.games)}
        for stage in STAGES:
            funnel[stage] = sum(1 for game in self.games if any(r.stage == stage and r.passed for r in game.reports))
        rejected = {game.game_id: game.reports[-1].stage for game in self.games if not game.eligible and game.reports}
        return {"type": "summary", "funnel": funnel, "eligible": self.eligible, "rejected_at": rejected}


def opponent_key(game_id: str) -> str:
    return f"{PIPELINE_PREFIX}/opponents/{game_id}.json"


def game_seed(seed: int, game_id: str) -> int:
    return derive_seed(seed, text_key(game_id))


def ensure_checkpoints(store: ArtifactStore, suite: GameSuite, game_id: str, config: RunConfig, train_missing: bool = True) -> List[str]:
    """Checkpoint keys for a game, training first when the expected set is incomplete."""
    schedule = TrainingSchedule.from_run_config(config)
    existing = list_checkpoints(store, game_id)
    if [timestep for timestep, _ in existing] == schedule.checkpoint_timesteps() or not train_missing:
        return [key for _, key in existing]
    spec = suite.spec(game_id)
    _, keys = train_game(
        store,
        lambda: suite.game_class(spec)(spec),
        schedule,
        PPOConfig.from_overrides(config.ppo_overrides),
        game_seed(config.seed, game_id),
        move_cap=config.move_cap,
        mask_invalid=config.mask_invalid,
        config_text=config.to_text(),
    )
    return keys


def run_game(store: ArtifactStore, suite: GameSuite, game_id: str, config: RunConfig, train_missing: bool = True) -> GameResult:
    result = GameResult(game_id)
    seed = game_seed(config.seed, game_id)
    try:
        spec = suite.spec(game_id)
        game_class = suite.game_class(spec)
    except SuiteError as exc:
        result.reports.append(FilterReport(game_id, "execution", False, {"reason": str(exc)}))
        return result

    def make_env():
        return game_class(spec)

    result.reports.append(keyword_report(spec))
    if not result.reports[-1].passed:
        return result
    result.reports.append(execution_filter(spec, make_env, n_random_games=config.execution_games, seed=derive_seed(seed, 1)))
    if not result.reports[-1].passed:
        return result
    result.reports.append(
        timeout_filter(spec, make_env, n_games=config.timeout_games, move_cap=config.move_cap, wall_budget=config.wall_budget, seed=derive_seed(seed, 2))
    )
    if not result.reports[-1].passed:
        return result

    keys = ensure_checkpoints(store, suite, game_id, config, train_missing=train_missing)
    if len(keys) < 2:
        result.reports.append(FilterReport(game_id, "upper_bound", False, {"reason": f"{len(keys)} checkpoint(s) available; need at least 2"}))
        return result
    checkpoints = []
    paths: Dict[int, str] = {}
    for key in keys:
        params, header = load_checkpoint(store, key)
        checkpoints.append((header.timestep, params))
        paths[header.timestep] = key
    selection = select_benchmark_opponent(
        spec,
        checkpoints,
        make_env,
        n_matches=config.selection_matches,
        use_mcts=config.use_mcts,
        n_rollouts=config.mcts_rollouts,
        move_cap=config.move_cap,
        seed=derive_seed(seed, 3),
    )
    scheduled = len(TrainingSchedule.from_run_config(config).checkpoint_timesteps())
    if len(keys) < scheduled:
        selection.report.details["warning"] = f"selected from {len(keys)} of {scheduled} scheduled checkpoints"
    result.reports.append(selection.report)
    if selection.selection is not None:
        selection.selection.opponent_path = paths[selection.selection.opponent_checkpoint]
        result.selection = selection.selection
    return result


def run_pipeline(
    store: ArtifactStore,
    suite: GameSuite,
    config: RunConfig,
    game_ids: Optional[Sequence[str]] = None,
    train_missing: bool = True,
    on_game: Optional[Callable[[GameResult], None]] = None,
) -> PipelineResult:
    game_ids = list(game_ids) if game_ids is not None else suite.ids()

    def one(game_id: str) -> GameResult:
        return run_game(store, suite, game_id, config, train_missing=train_missing)

    if config.parallelism > 1:
        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            games = list(pool.map(one, game_ids))
    else:
        games = [one(game_id) for game_id in game_ids]

    result = PipelineResult(games)
    records: List[dict] = []
    for game in games:
        records.extend(report.to_dict() for report in game.reports)
        if game.selection is not None:
            records.append(game.selection.to_dict())
            store.write_json(opponent_key(game.game_id), game.selection.to_dict())
        else:
            store.delete(opponent_key(game.game_id))
        if on_game is not None:
            on_game(game)
    records.append(result.summary())
    store.write_jsonl(REPORT_KEY, records)
    store.write_text(f"{PIPELINE_PREFIX}/config.txt", config.to_text())
    return result


def load_selection(store: ArtifactStore, game_id: str) -> OpponentSelection:
    key = opponent_key(game_id)
    if not store.exists(key):
        raise FileNotFoundError(f"no selected opponent for {game_id} ({store.uri_for_key(key)}); run `arena pipeline` first")
    return OpponentSelection.from_dict(store.read_json(key))
