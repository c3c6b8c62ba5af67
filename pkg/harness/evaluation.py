"""
Evaluation protocol and report statistics.

An agent plays ``n_matches`` against a game's benchmark opponent with the
first seat alternating between them. Per-game winrates carry a Wald 95%
interval; the cross-game mean carries a normal interval over the per-game
winrates (sample standard deviation).

The winrate denominator is every match except those the engine itself broke;
agent faults and agent-side aborts count as non-wins.
"""
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from engine.core_env import DEFAULT_MOVE_CAP, ContractError, TwoPlayerEnv
from harness.agents import Agent
from harness.match import MatchRecord, play_match
from runtime.artifact_store import ArtifactStore
from runtime.run_pointer import run_prefix, write_latest
from runtime.rng import MASK64, derive_seed, text_key

Z95 = 1.96
DEFAULT_MATCHES = 30
FAILURE_BUCKETS = ("Losses", "Faults", "Draws", "EnvErrors")
_BUCKET_FOR_RESULT = {"loss": "Losses", "fault": "Faults", "draw": "Draws", "env_error": "EnvErrors"}


@dataclass
class GameReport:
    game_id: str
    agent: str
    n_matches: int
    wins: int
    losses: int
    draws: int
    faults: int
    env_errors: int
    winrate: float
    ci95_halfwidth: float
    detail: Optional[str] = None

    def to_dict(self) -> dict:
        payload = dict(asdict(self), type="game")
        if payload["detail"] is None:
            payload.pop("detail")
        return payload


@dataclass
class AggregateReport:
    agent: str
    games: int
    mean_winrate: float
    ci95_halfwidth: Optional[float]

    def to_dict(self) -> dict:
        return dict(asdict(self), type="aggregate")


def wald_ci(wins: int, n: int) -> Tuple[float, float]:
    if n < 1 or not 0 <= wins <= n:
        raise ContractError(f"wald_ci needs 0 <= wins <= n and n >= 1 (got {wins}/{n})")
    p = wins / n
    return p, Z95 * math.sqrt(p * (1.0 - p) / n)


def aggregate(winrates: Sequence[float]) -> Tuple[float, Optional[float]]:
    """Mean winrate and its 95% half-width; the half-width is None for fewer than two games."""
    if len(winrates) == 0:
        raise ContractError("aggregate needs at least one winrate")
    values = np.asarray(winrates, dtype=np.float64)
    mean = float(values.mean())
    if len(values) < 2:
        return mean, None
    return mean, float(Z95 * values.std(ddof=1) / math.sqrt(len(values)))


def match_seeds(base_seed: int, game_id: str, n_matches: int) -> List[int]:
    return [derive_seed(base_seed, text_key(game_id), index) & (MASK64 >> 1) for index in range(n_matches)]


def run_eval(
    make_agent: Callable[[], Agent],
    make_opponent: Callable[[], Agent],
    make_env: Callable[[], TwoPlayerEnv],
    n_matches: int = DEFAULT_MATCHES,
    seeds: Optional[Sequence[int]] = None,
    base_seed: int = 0,
    move_cap: int = DEFAULT_MOVE_CAP,
    parallelism: int = 1,
) -> Tuple[List[MatchRecord], GameReport]:
    """The agent is always A; match i gives A the first seat when i is even."""
    game_id = make_env().game_spec.id
    seeds = list(seeds) if seeds is not None else match_seeds(base_seed, game_id, n_matches)
    if len(seeds) != n_matches:
        raise ContractError(f"expected {n_matches} seeds, got {len(seeds)}")

    def one(index: int) -> MatchRecord:
        first = "A" if index % 2 == 0 else "B"
        record = play_match(make_agent(), make_opponent(), make_env, seeds[index], first_seat=first, move_cap=move_cap)
        record.game_id = record.game_id or game_id
        return record

    if parallelism > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            records = list(pool.map(one, range(n_matches)))
    else:
        records = [one(index) for index in range(n_matches)]
    return records, summarize_matches(records, game_id=game_id)


def summarize_matches(records: Sequence[MatchRecord], game_id: Optional[str] = None, label: str = "A") -> GameReport:
    if not records and game_id is None:
        raise ContractError("cannot summarize an empty match list without a game id")
    counts = Counter(record.result_for(label) for record in records)
    n = len(records)
    decided = n - sum(1 for record in records if record.engine_error)
    winrate, halfwidth = wald_ci(counts["win"], decided) if decided else (0.0, 0.0)
    details = sorted({record.detail for record in records if record.outcome.value == "EnvError" and record.detail})
    agent = getattr(records[0], f"agent_{label.lower()}") if records else "unknown"
    return GameReport(
        game_id=game_id or records[0].game_id,
        agent=agent,
        n_matches=n,
        wins=counts["win"],
        losses=counts["loss"],
        draws=counts["draw"],
        faults=counts["fault"],
        env_errors=counts["env_error"],
        winrate=winrate,
        ci95_halfwidth=halfwidth,
        detail="; ".join(details) if details else None,
    )


def reports_from_matches(records: Iterable[MatchRecord]) -> List[GameReport]:
    grouped: Dict[Tuple[str, str], List[MatchRecord]] = {}
    for record in records:
        grouped.setdefault((record.agent_a, record.game_id), []).append(record)
    return [summarize_matches(group, game_id=game_id) for (_, game_id), group in sorted(grouped.items())]


def aggregate_reports(reports: Sequence[GameReport]) -> List[AggregateReport]:
    by_agent: Dict[str, List[float]] = {}
    for report in reports:
        by_agent.setdefault(report.agent, []).append(report.winrate)
    rows = []
    for agent, winrates in sorted(by_agent.items()):
        mean, halfwidth = aggregate(winrates)
        rows.append(AggregateReport(agent=agent, games=len(winrates), mean_winrate=mean, ci95_halfwidth=halfwidth))
    return rows


def failure_breakdown(counts: Dict[str, int]) -> Dict[str, float]:
    """Percentage of non-win matches per bucket (Losses, Faults, Draws, EnvErrors), two decimals."""
    total = sum(counts.get(bucket, 0) for bucket in FAILURE_BUCKETS)
    if total == 0:
        return {bucket: 0.0 for bucket in FAILURE_BUCKETS}
    return {bucket: round(100.0 * counts.get(bucket, 0) / total, 2) for bucket in FAILURE_BUCKETS}


def failure_counts(records: Iterable[MatchRecord], label: str = "A") -> Dict[str, int]:
    counts = {bucket: 0 for bucket in FAILURE_BUCKETS}
    for record in records:
        bucket = _BUCKET_FOR_RESULT.get(record.result_for(label))
        if bucket:
            counts[bucket] += 1
    return counts


def format_mean_ci(mean: float, halfwidth: Optional[float]) -> str:
    if halfwidth is None:
        return f"{100 * mean:.2f} (CI omitted: fewer than 2 games)"
    return f"{100 * mean:.2f} (± {100 * halfwidth:.2f})"


def report_frame(reports: Sequence[GameReport]) -> pd.DataFrame:
    rows = [
        {
            "game": report.game_id,
            "agent": report.agent,
            "matches": report.n_matches,
            "wins": report.wins,
            "losses": report.losses,
            "draws": report.draws,
            "faults": report.faults,
            "env_errors": report.env_errors,
            "winrate": format_mean_ci(report.winrate, report.ci95_halfwidth),
        }
        for report in reports
    ]
    columns = ["game", "agent", "matches", "wins", "losses", "draws", "faults", "env_errors", "winrate"]
    return pd.DataFrame(rows, columns=columns)


def render_report(records: Sequence[MatchRecord]) -> str:
    if not records:
        return "No matches recorded."
    reports = reports_from_matches(records)
    lines = [report_frame(reports).to_string(index=False), ""]
    for row in aggregate_reports(reports):
        lines.append(f"Mean winrate [{row.agent}] over {row.games} game(s): {format_mean_ci(row.mean_winrate, row.ci95_halfwidth)}")
    breakdown = failure_breakdown(failure_counts(records))
    lines.append("Non-win breakdown: " + ", ".join(f"{bucket} {breakdown[bucket]:.2f}%" for bucket in FAILURE_BUCKETS))
    return "\n".join(lines) + "\n"


def write_eval_run(store: ArtifactStore, run_id: str, records: Sequence[MatchRecord], config_text: str) -> str:
    prefix = run_prefix(run_id)
    reports = reports_from_matches(records)
    store.write_jsonl(f"{prefix}/matches.jsonl", [record.to_dict() for record in records])
    rows = [report.to_dict() for report in reports]
    if reports:
        rows += [row.to_dict() for row in aggregate_reports(reports)]
    store.write_jsonl(f"{prefix}/report.jsonl", rows)
    store.write_text(f"{prefix}/report.txt", render_report(records))
    store.write_text(f"{prefix}/config.txt", config_text)
    write_latest(store, run_id)
    return prefix


def load_matches(store: ArtifactStore, prefix: str) -> List[MatchRecord]:
    key = f"{prefix}/matches.jsonl" if prefix else "matches.jsonl"
    if not store.exists(key):
        raise FileNotFoundError(f"missing match log: {store.uri_for_key(key)}")
    return [MatchRecord.from_dict(payload) for payload in store.read_jsonl(key)]
