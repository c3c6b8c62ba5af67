import argparse
import os
import sys
from typing import Dict, List, Optional

import pandas as pd

from engine.core_env import ContractError, SuiteError
from engine.suite import GameSuite, load_suite
from harness import protocol
from harness.agents import Agent, AgentSpec, HumanAgent, MCTSAgent, parse_agent_spec, tally_note
from harness.evaluation import load_matches, render_report, run_eval, write_eval_run
from harness.filters import execution_filter
from harness.match import MatchOutcome, MatchRecord, play_match
from harness.pipeline import PIPELINE_PREFIX, GameResult, game_seed, load_selection, opponent_key, run_pipeline
from rl.checkpoint import CheckpointError, checkpoint_key, load_checkpoint
from rl.ppo import PPOConfig, TrainingError
from rl.selfplay import TrainingSchedule, train_game
from runtime.artifact_store import ArtifactStore, LocalArtifactStore, build_artifact_store
from runtime.config import ConfigError, RunConfig, build_run_config, load_config_file
from runtime.rng import derive_seed
from runtime.run_pointer import get_latest_run_id, run_prefix
from runtime.schema_validate import validate_or_raise, validate_pipeline, validate_run
from runtime.shadow import append_shadow, run_timestamp, utc_now_iso, write_run_status

USER_ERRORS = (ConfigError, SuiteError, ContractError, CheckpointError, TrainingError, FileNotFoundError, ValueError)


def _run_config(args) -> RunConfig:
    file_values = load_config_file(args.config) if args.config else {}
    overrides = {
        "suite_path": args.suite,
        "output_dir": args.out,
        "seed": args.seed,
        "profile": args.profile,
        "mcts_rollouts": args.rollouts,
        "n_eval_matches": args.matches,
        "parallelism": args.parallel,
    }
    return build_run_config(file_values, overrides, source=args.config or "<config>")


def _make_env_factory(suite: GameSuite, game_id: str):
    spec = suite.spec(game_id)
    game_class = suite.game_class(spec)
    return lambda: game_class(spec)


class _Tracked:
    """Bookends a command with run_status.json and shadow events under one prefix."""

    def __init__(self, store: ArtifactStore, prefix: str, stage: str):
        self.store = store
        self.prefix = prefix
        self.stage = stage
        self.started_at = utc_now_iso()

    def __enter__(self):
        write_run_status(self.store, self.prefix, "running", f"{self.stage} started", started_at=self.started_at)
        append_shadow(self.store, self.prefix, self.stage, "start")
        return self

    def note(self, message: str, **meta) -> None:
        append_shadow(self.store, self.prefix, self.stage, message, **meta)

    def __exit__(self, exc_type, exc, tb):
        if exc is None:
            append_shadow(self.store, self.prefix, self.stage, "done")
            write_run_status(self.store, self.prefix, "success", f"{self.stage} finished", started_at=self.started_at)
            return False
        append_shadow(self.store, self.prefix, "error", f"{type(exc).__name__}: {exc}")
        write_run_status(self.store, self.prefix, "failure", str(exc), started_at=self.started_at)
        return False


def games_list_command(args):
    config = _run_config(args)
    suite = load_suite(config.suite_path)
    rows = [
        {"id": spec.id, "title": spec.title, "action_space_size": spec.action_space_size, "observation_dim": spec.observation_dim}
        for spec in suite.specs()
    ]
    if not rows:
        print(f"No games in {suite.root}")
        return 0
    print(pd.DataFrame(rows).to_string(index=False))
    return 0


def _format_progress(record: dict) -> str:
    reward = record.get("mean_episode_reward")
    reward_text = "n/a" if reward is None else f"{reward:+.3f}"
    return (
        f"t={record['timestep']} update={record['update']} reward={reward_text} eps={record['epsilon']:.3f} "
        f"policy_loss={record.get('policy_loss', 0.0):.4f} value_loss={record.get('value_loss', 0.0):.4f} "
        f"kl={record.get('approx_kl', 0.0):.4f}"
    )


def train_command(args):
    config = _run_config(args)
    suite = load_suite(config.suite_path)
    spec = suite.spec(args.game_id)
    make_env = _make_env_factory(suite, spec.id)
    seed = game_seed(config.seed, spec.id)

    report = execution_filter(spec, make_env, n_random_games=config.execution_games, seed=derive_seed(seed, 1))
    if not report.passed:
        print(f"{spec.id}: execution filter failed: {report.details.get('reason')}", file=sys.stderr)
        return 1

    store = build_artifact_store(config.output_dir)
    schedule = TrainingSchedule.from_run_config(config)
    print(f"Training {spec.id}: {schedule.total_timesteps} timesteps, checkpoints at {schedule.checkpoint_timesteps()}")
    with _Tracked(store, f"checkpoints/{spec.id}", "train") as tracked:
        run, keys = train_game(
            store,
            make_env,
            schedule,
            PPOConfig.from_overrides(config.ppo_overrides),
            seed,
            move_cap=config.move_cap,
            mask_invalid=config.mask_invalid,
            config_text=config.to_text(),
            on_update=lambda record: print(_format_progress(record)),
        )
        tracked.note("checkpoints written", keys=keys, stats=run.stats.as_dict())
    for key in keys:
        print(f"wrote {store.uri_for_key(key)}")
    stats = run.stats
    print(f"Episodes {stats.episodes}: {stats.wins} won, {stats.losses} lost, {stats.draws} drawn, {stats.truncations} truncated")
    if stats.flagged:
        print(f"warning: {stats.truncation_rate:.0%} of episodes hit the move cap", file=sys.stderr)
    return 0


def _print_game_result(game: GameResult) -> None:
    last = game.reports[-1] if game.reports else None
    if game.eligible:
        selection = game.selection
        print(
            f"{game.game_id}: eligible; opponent ckpt-{selection.opponent_checkpoint} "
            f"(ckpt-{selection.dominating_checkpoint} wins {selection.disparity:.0%})"
        )
    elif last is not None:
        print(f"{game.game_id}: rejected at {last.stage}: {last.details.get('reason', 'failed')}")
    if last is not None and "warning" in last.details:
        print(f"warning: {game.game_id}: {last.details['warning']}", file=sys.stderr)
    if last is not None and last.stage == "upper_bound" and "winrate_matrix" in last.details:
        labels = [f"ckpt-{timestep}" for timestep in last.details["checkpoints"]]
        print(pd.DataFrame(last.details["winrate_matrix"], index=labels, columns=labels).to_string())


def pipeline_command(args):
    config = _run_config(args)
    suite = load_suite(config.suite_path)
    store = build_artifact_store(config.output_dir)
    game_ids = args.games or None
    if game_ids:
        for game_id in game_ids:
            suite.spec(game_id)
    with _Tracked(store, PIPELINE_PREFIX, "pipeline") as tracked:
        result = run_pipeline(store, suite, config, game_ids=game_ids, train_missing=not args.no_train, on_game=_print_game_result)
        validate_or_raise(validate_pipeline(store, PIPELINE_PREFIX))
        summary = result.summary()
        tracked.note("funnel", **summary["funnel"])
    funnel = summary["funnel"]
    print("Funnel: " + " -> ".join(f"{stage} {count}" for stage, count in funnel.items()))
    print(f"Eligible: {', '.join(summary['eligible']) or 'none'}")
    return 0


def _opponent_factory(store: ArtifactStore, game_id: str, config: RunConfig):
    selection = load_selection(store, game_id)
    key = selection.opponent_path or checkpoint_key(game_id, selection.opponent_checkpoint)
    params, header = load_checkpoint(store, key)
    source = f"{game_id}/ckpt-{header.timestep}"
    return lambda: MCTSAgent(params, source=source, n_rollouts=config.mcts_rollouts, move_cap=config.move_cap)


def _agent_spec(text: str, config: RunConfig) -> AgentSpec:
    agent_spec = parse_agent_spec(
        text,
        n_rollouts=config.mcts_rollouts,
        move_cap=config.move_cap,
        max_reprompts=config.max_reprompts,
        move_timeout=config.move_timeout,
    )
    if agent_spec.kind in ("policy", "mcts"):
        agent_spec.params()
    return agent_spec


def eval_command(args):
    config = _run_config(args)
    suite = load_suite(config.suite_path)
    store = build_artifact_store(config.output_dir)
    agent_spec = _agent_spec(args.agent, config)
    if agent_spec.kind == "human" and config.parallelism > 1:
        raise SystemExit("human agents cannot play parallel matches; use --parallel 1")

    if args.game == "all":
        game_ids = [game_id for game_id in suite.ids() if store.exists(opponent_key(game_id))]
        if not game_ids:
            raise FileNotFoundError(f"no selected opponents under {store.uri_for_key(PIPELINE_PREFIX)}; run `arena pipeline` first")
    else:
        suite.spec(args.game)
        game_ids = [args.game]

    run_id = args.run_id or run_timestamp()
    prefix = run_prefix(run_id)
    records: List[MatchRecord] = []
    with _Tracked(store, prefix, "eval") as tracked:
        for game_id in game_ids:
            make_opponent = _opponent_factory(store, game_id, config)
            game_records, report = run_eval(
                agent_spec.build,
                make_opponent,
                _make_env_factory(suite, game_id),
                n_matches=config.n_eval_matches,
                base_seed=config.seed,
                move_cap=config.move_cap,
                parallelism=config.parallelism,
            )
            records.extend(game_records)
            tracked.note("game evaluated", game_id=game_id, wins=report.wins, faults=report.faults, env_errors=report.env_errors)
            print(f"{game_id}: {report.wins}/{report.n_matches} wins, {report.faults} faults, {report.env_errors} env errors")
        write_eval_run(store, run_id, records, config.to_text())
        validate_or_raise(validate_run(store, prefix))
    print(render_report(records), end="")
    print(f"Run written to {store.uri_for_key(prefix)}")
    return 0


class _AnnouncedAgent(Agent):
    """Prints each move the wrapped agent makes, with its rollout tally when it has one."""

    def __init__(self, inner: Agent, labels: Dict[int, str]):
        super().__init__()
        self.inner = inner
        self.labels = labels
        self.kind = inner.kind

    @property
    def descriptor(self) -> str:
        return self.inner.descriptor

    def start(self, spec, seed: int) -> None:
        super().start(spec, seed)
        self.inner.start(spec, seed)

    def choose(self, env) -> int:
        action = self.inner.choose(env)
        self.last_reprompts = self.inner.last_reprompts
        label = self.labels.get(action, "")
        print(f"Opponent plays {action}" + (f" ({label})" if label else ""))
        note = tally_note(self.inner)
        if note:
            print(f"  {note}")
        return action

    def close(self) -> None:
        self.inner.close()


_PLAY_MESSAGES = {"win": "You win.", "loss": "You lose.", "draw": "Draw."}


def play_command(args):
    config = _run_config(args)
    suite = load_suite(config.suite_path)
    spec = suite.spec(args.game_id)
    opponent = _AnnouncedAgent(_agent_spec(args.vs, config).build(), spec.action_labels())
    if opponent.kind == "human":
        raise SystemExit("--vs human is not supported; pick an agent to play against")

    print(protocol.system_prompt(spec))
    print("Type a move number, or q to quit.\n")
    first = "B" if args.second else "A"
    record = play_match(HumanAgent(), opponent, _make_env_factory(suite, spec.id), config.seed, first_seat=first, move_cap=config.move_cap)
    if record.outcome is MatchOutcome.ENV_ERROR:
        print(f"Game aborted: {record.detail}")
        return 1
    result = record.result_for("A")
    message = _PLAY_MESSAGES.get(result, "You forfeited.")
    if record.outcome is MatchOutcome.FAULT_B:
        message = "Opponent faulted; you win."
    print(f"{message} ({record.move_count} moves{', ' + record.detail if record.detail else ''})")
    return 0


def _report_source(args, config: RunConfig):
    if args.run_dir and os.path.isdir(args.run_dir):
        return LocalArtifactStore(args.run_dir), ""
    store = build_artifact_store(config.output_dir)
    run_id = args.run_dir or get_latest_run_id(store)
    if not run_id:
        raise FileNotFoundError(f"no evaluation runs under {store.uri_for_key('runs')}")
    return store, run_prefix(run_id)


def report_command(args):
    config = _run_config(args)
    store, prefix = _report_source(args, config)
    records = load_matches(store, prefix)
    if not records:
        print("No matches recorded.")
        return 0
    print(render_report(records), end="")
    return 0


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--suite", help="Game suite directory (default: ARENA_SUITE or ./games).")
    common.add_argument("--out", help="Output root, local path or gs://bucket/prefix (default: ARENA_OUTPUT or ./artifacts).")
    common.add_argument("--seed", help="Base seed (default: ARENA_SEED or 0).")
    common.add_argument("--profile", choices=("paper", "desk"), help="Training schedule profile.")
    common.add_argument("--rollouts", help="Rollouts per MCTS move.")
    common.add_argument("--matches", help="Matches per game in eval.")
    common.add_argument("--parallel", help="Worker threads (games in pipeline, matches in eval).")
    common.add_argument("--config", help="key = value config file; flags override it.")
    return common


def main(argv: Optional[List[str]] = None):
    common = _common_flags()
    parser = argparse.ArgumentParser(prog="arena", description="Two-player game arena: train, filter, evaluate.")
    subparsers = parser.add_subparsers(dest="command", required=True)

    games_parser = subparsers.add_parser("games", help="Inspect the game suite.")
    games_sub = games_parser.add_subparsers(dest="games_command", required=True)
    list_parser = games_sub.add_parser("list", parents=[common], help="List games in the suite.")
    list_parser.set_defaults(func=games_list_command)

    train_parser = subparsers.add_parser("train", parents=[common], help="Self-play training for one game.")
    train_parser.add_argument("game_id")
    train_parser.set_defaults(func=train_command)

    pipeline_parser = subparsers.add_parser("pipeline", parents=[common], help="Filter the suite and select opponents.")
    pipeline_parser.add_argument("--games", nargs="+", help="Only these game ids.")
    pipeline_parser.add_argument("--no-train", action="store_true", help="Use existing checkpoints only.")
    pipeline_parser.set_defaults(func=pipeline_command)

    eval_parser = subparsers.add_parser("eval", parents=[common], help="Evaluate an agent against selected opponents.")
    eval_parser.add_argument("game", help="Game id or 'all'.")
    eval_parser.add_argument("--agent", required=True, help="random | policy:<ckpt> | mcts:<ckpt> | external:<command> | human")
    eval_parser.add_argument("--run-id", help="Optional run id (default: UTC timestamp).")
    eval_parser.set_defaults(func=eval_command)

    play_parser = subparsers.add_parser("play", parents=[common], help="Play a game at the console.")
    play_parser.add_argument("game_id")
    play_parser.add_argument("--vs", required=True, help="Opponent agent spec.")
    play_parser.add_argument("--second", action="store_true", help="Let the opponent move first.")
    play_parser.set_defaults(func=play_command)

    report_parser = subparsers.add_parser("report", parents=[common], help="Print the report for an eval run.")
    report_parser.add_argument("run_dir", nargs="?", help="Run directory or run id (default: latest).")
    report_parser.set_defaults(func=report_command)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
