import json
from pathlib import Path

from engine.games.divide_conquer import DivideAndConquer
from engine.games.isolation import Isolation
from engine.games.light_out import LightOutDuel
from engine.games.reach27 import Reach27
from engine.solvers import (
    compute_game_values,
    divide_smooth_starts,
    divide_winning_starts,
    kayles_grundy,
    node_kayles_path_grundy,
    reach27_losing_totals,
    solve_env,
    winning_moves,
)

GOLDEN = Path(__file__).resolve().parent / "golden" / "game_values.json"


def test_values_match_golden_file():
    assert compute_game_values() == json.loads(GOLDEN.read_text(encoding="utf-8"))


def test_reach27_losing_totals():
    assert reach27_losing_totals() == [7, 17]


def test_reach27_search_agrees_with_retrograde_table():
    for total in range(27):
        env = Reach27()
        env.reset(options={"total": total})
        expected = -1 if total in (7, 17) else 1
        assert solve_env(env) == expected, total


def test_reach27_winning_opening():
    assert winning_moves(Reach27()) == [6]


def test_kayles_values():
    assert [kayles_grundy(n) for n in range(8)] == [0, 1, 2, 3, 1, 4, 3, 2]
    assert solve_env(LightOutDuel()) == 1


def test_isolation_grundy_matches_search():
    assert [node_kayles_path_grundy(n) for n in range(14)] == [0, 1, 1, 2, 0, 3, 1, 1, 0, 3, 3, 2, 2, 4]
    assert solve_env(Isolation()) == 1


def test_divide_parity_matches_search():
    winners = set(divide_winning_starts())
    for n in divide_smooth_starts():
        env = DivideAndConquer()
        env.reset(options={"n": n})
        assert (solve_env(env) == 1) == (n in winners), n


def test_solve_games_tool_checks_and_writes(tmp_path, capsys):
    from tools.solve_games import main

    assert main(["--check", "--out", str(GOLDEN)]) == 0
    assert "Golden values match" in capsys.readouterr().out

    out = tmp_path / "values.json"
    assert main(["--out", str(out)]) == 0
    assert json.loads(out.read_text(encoding="utf-8")) == compute_game_values()

    out.write_text("{}\n", encoding="utf-8")
    assert main(["--check", "--out", str(out)]) == 1
