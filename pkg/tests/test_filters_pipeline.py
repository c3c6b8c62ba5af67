import pytest

from engine.core_env import ContractError
from engine.suite import GameSuite, load_suite
from harness.filters import (
    FilterReport,
    execution_filter,
    keyword_filter,
    keyword_report,
    pick_opponent,
    select_benchmark_opponent,
    timeout_filter,
)
from harness.pipeline import REPORT_KEY, load_selection, opponent_key, run_pipeline
from rl.checkpoint import CheckpointHeader, save_checkpoint
from rl.network import PolicyParams
from runtime.artifact_store import LocalArtifactStore
from runtime.config import RunConfig
from runtime.schema_validate import validate_pipeline
from tests.fixtures.suites import copy_game, write_broken_game, write_game, write_keyword_game


def always_adds(action: int) -> PolicyParams:
    """Reach 27 policy whose greedy move is fixed regardless of the total."""
    params = PolicyParams.zeros(2, 9)
    params.bp[action] = 5.0
    return params


def suite_env(root, game_id):
    suite = GameSuite(str(root))
    spec = suite.spec(game_id)
    game_class = suite.game_class(spec)
    return spec, lambda: game_class(spec)


def small_config(tmp_path, **overrides) -> RunConfig:
    values = dict(
        suite_path=str(tmp_path / "games"),
        output_dir=str(tmp_path / "out"),
        profile="desk",
        execution_games=5,
        timeout_games=4,
        use_mcts=False,
    )
    values.update(overrides)
    return RunConfig(**values)


def test_keyword_filter(tmp_path):
    assert keyword_filter("- `0`: add 1")
    assert not keyword_filter("- `1`: add **N**")
    write_keyword_game(tmp_path)
    spec, _ = suite_env(tmp_path, "starred-actions")
    report = keyword_report(spec)
    assert not report.passed
    assert report.stage == "keyword"
    for shipped in load_suite().specs():
        assert keyword_report(shipped).passed, shipped.id


def test_execution_filter_accepts_shipped_game():
    suite = load_suite()
    spec = suite.spec("reach27")
    report = execution_filter(spec, lambda: suite.game_class(spec)(spec), n_random_games=20, seed=1)
    assert report.passed
    assert report.details["games_played"] == 20
    assert 3 <= report.details["max_moves"] <= 27


@pytest.mark.parametrize(
    "game_id, reason",
    [("wrong-observation", "does not match declared observation_dim 3"), ("step-raises", "scoring table overflow")],
)
def test_execution_filter_rejects_broken_games(tmp_path, game_id, reason):
    write_broken_game(tmp_path, game_id)
    spec, make_env = suite_env(tmp_path, game_id)
    report = execution_filter(spec, make_env, n_random_games=10)
    assert not report.passed
    assert reason in report.details["reason"]


def test_timeout_filter_rejects_capped_games(tmp_path):
    write_broken_game(tmp_path, "never-ending")
    spec, make_env = suite_env(tmp_path, "never-ending")
    assert execution_filter(spec, make_env, n_random_games=3).passed
    report = timeout_filter(spec, make_env, n_games=4, move_cap=100)
    assert not report.passed
    assert report.details["max_moves"] == 100
    assert "4 probe game(s) reached the 100-move cap" in report.details["reason"]
    assert "wall_clock" not in report.details


def test_timeout_filter_error_rate_threshold(tmp_path):
    write_broken_game(tmp_path, "seed-flaky")
    spec, make_env = suite_env(tmp_path, "seed-flaky")

    failing = timeout_filter(spec, make_env, seeds=range(10))
    assert not failing.passed
    assert failing.details["exception_rate"] == 0.3

    passing = timeout_filter(spec, make_env, seeds=[0, 1, 3, 4, 5, 6, 7, 8, 9, 13])
    assert passing.passed
    assert passing.details["exception_rate"] == 0.2


def test_timeout_filter_wall_budget():
    suite = load_suite()
    spec = suite.spec("reach27")
    report = timeout_filter(spec, lambda: suite.game_class(spec)(spec), n_games=10, wall_budget=1e-9)
    assert not report.passed
    assert report.details["games_played"] == 1
    assert report.details["wall_clock"] >= 0
    assert "wall clock" in report.details["reason"]


def test_pick_opponent():
    wins = [[0, 1, 0], [5, 0, 3], [6, 3, 0]]
    assert pick_opponent([10, 20, 30], wins, 6) == ((0, 2), 1.0)

    tied = [[0, 0, 0], [6, 0, 0], [6, 0, 0]]
    assert pick_opponent([10, 20, 30], tied, 6) == ((0, 1), 1.0)

    even = [[0, 3], [3, 0]]
    assert pick_opponent([10, 20], even, 6) == (None, 0.5)


def test_selection_picks_the_dominated_checkpoint():
    suite = load_suite()
    spec = suite.spec("reach27")
    make_env = lambda: suite.game_class(spec)(spec)  # noqa: E731
    # Always adding 9 overshoots 27 from either seat; always adding 1 never does.
    result = select_benchmark_opponent(spec, [(64, always_adds(8)), (128, always_adds(0))], make_env, use_mcts=False)
    assert result.report.passed
    assert result.matrix == [[0.0, 0.0], [1.0, 0.0]]
    assert (result.selection.opponent_checkpoint, result.selection.dominating_checkpoint) == (64, 128)
    assert result.selection.disparity == 1.0


def test_selection_fails_without_disparity():
    suite = load_suite()
    spec = suite.spec("reach27")
    make_env = lambda: suite.game_class(spec)(spec)  # noqa: E731
    result = select_benchmark_opponent(spec, [(64, always_adds(0)), (128, always_adds(0))], make_env, use_mcts=False)
    assert not result.report.passed
    assert result.selection is None
    assert result.matrix == [[0.0, 0.5], [0.5, 0.0]]
    assert "no checkpoint pair reaches a 80% winrate" in result.report.details["reason"]

    with pytest.raises(ContractError):
        select_benchmark_opponent(spec, [(64, always_adds(0))], make_env)
    with pytest.raises(ContractError):
        select_benchmark_opponent(spec, [(64, always_adds(0)), (128, always_adds(0))], make_env, n_matches=5)


def test_filter_report_rejects_unknown_stage():
    with pytest.raises(ContractError):
        FilterReport("reach27", "vibes", True)


def test_pipeline_funnel(tmp_path):
    games = tmp_path / "games"
    copy_game(games, "reach27")
    write_keyword_game(games)
    write_broken_game(games, "wrong-observation")
    write_broken_game(games, "never-ending")
    store = LocalArtifactStore(tmp_path / "out")
    for timestep, params in ((64, always_adds(8)), (128, always_adds(0))):
        save_checkpoint(store, params, CheckpointHeader("reach27", 2, 9, timestep, 0))

    seen = []
    config = small_config(tmp_path)
    result = run_pipeline(store, GameSuite(config.suite_path), config, train_missing=False, on_game=lambda game: seen.append(game.game_id))

    assert seen == ["never-ending", "reach27", "starred-actions", "wrong-observation"]
    assert result.eligible == ["reach27"]
    summary = result.summary()
    assert summary["funnel"] == {"entered": 4, "keyword": 3, "execution": 2, "timeout": 1, "upper_bound": 1}
    assert summary["rejected_at"] == {"never-ending": "timeout", "starred-actions": "keyword", "wrong-observation": "execution"}

    assert validate_pipeline(store) == []
    assert store.read_jsonl(REPORT_KEY)[-1] == summary
    selection = load_selection(store, "reach27")
    assert selection.opponent_checkpoint == 64
    assert selection.opponent_path == "checkpoints/reach27/ckpt-64.bin"
    with pytest.raises(FileNotFoundError):
        load_selection(store, "never-ending")


def test_pipeline_needs_two_checkpoints(tmp_path):
    copy_game(tmp_path / "games", "reach27")
    store = LocalArtifactStore(tmp_path / "out")
    config = small_config(tmp_path)
    result = run_pipeline(store, GameSuite(config.suite_path), config, train_missing=False)
    upper = result.games[0].reports[-1]
    assert (upper.stage, upper.passed) == ("upper_bound", False)
    assert upper.details["reason"] == "0 checkpoint(s) available; need at least 2"
    assert result.eligible == []


def test_pipeline_reports_are_reproducible(tmp_path):
    copy_game(tmp_path / "games", "reach27")
    config = small_config(tmp_path)
    first = run_pipeline(LocalArtifactStore(tmp_path / "a"), GameSuite(config.suite_path), config, train_missing=False)
    second = run_pipeline(LocalArtifactStore(tmp_path / "b"), GameSuite(config.suite_path), config, train_missing=False)
    assert [r.to_dict() for r in first.games[0].reports] == [r.to_dict() for r in second.games[0].reports]


def test_rerun_drops_opponents_of_rejected_games(tmp_path):
    games = tmp_path / "games"
    copy_game(games, "reach27")
    store = LocalArtifactStore(tmp_path / "out")
    for timestep, params in ((64, always_adds(8)), (128, always_adds(0))):
        save_checkpoint(store, params, CheckpointHeader("reach27", 2, 9, timestep, 0))
    config = small_config(tmp_path)

    first = run_pipeline(store, GameSuite(config.suite_path), config, train_missing=False)
    assert first.eligible == ["reach27"]
    assert first.games[0].reports[-1].details["warning"] == "selected from 2 of 4 scheduled checkpoints"
    assert store.exists(opponent_key("reach27"))

    write_game(games, "reach27", "tests.fixtures.broken_games:StepRaises", 9, 2)
    second = run_pipeline(store, GameSuite(config.suite_path), config, train_missing=False)
    assert second.eligible == []
    assert second.summary()["rejected_at"] == {"reach27": "execution"}
    assert not store.exists(opponent_key("reach27"))
    with pytest.raises(FileNotFoundError):
        load_selection(store, "reach27")
    assert validate_pipeline(store) == []
