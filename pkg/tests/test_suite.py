import re

import pytest

from engine.core_env import SuiteError
from engine.suite import build_env, load_suite
from tests.fixtures.suites import copy_game, write_broken_game

SHIPPED = {
    "cross-over",
    "digit-dilemma",
    "divide-and-conquer",
    "isolation",
    "light-out-duel",
    "number-duel",
    "order-challenge",
    "palindrome-duel",
    "prime-claim",
    "reach27",
}


def test_shipped_suite_has_ten_games():
    suite = load_suite()
    assert set(suite.ids()) == SHIPPED
    for spec in suite.specs():
        assert spec.rulebook_text.strip()
        assert len(spec.action_labels()) == spec.action_space_size, spec.id


def test_build_env():
    assert build_env("reach27").action_space.n == 9
    assert build_env("number-duel").observation_space.shape == (21,)
    with pytest.raises(SuiteError, match="nosuchgame"):
        build_env("nosuchgame")


def test_rulebooks_follow_the_section_template():
    for spec in load_suite().specs():
        for heading in ("## Objective", "## Setup", "## Turns", "## Rules and Mechanics"):
            assert heading in spec.rulebook_text, (spec.id, heading)


def test_meta_missing_field_names_the_file(tmp_path):
    game_dir = copy_game(tmp_path, "reach27")
    meta = game_dir / "meta"
    meta.write_text("\n".join(line for line in meta.read_text().splitlines() if not line.startswith("observation_dim")) + "\n")
    with pytest.raises(SuiteError, match=re.escape(str(meta))):
        load_suite(str(tmp_path)).spec("reach27")


def test_meta_id_must_match_directory(tmp_path):
    game_dir = copy_game(tmp_path, "reach27")
    (game_dir.parent / "reach28").mkdir()
    for name in ("meta", "rules.md", "actions.md"):
        (game_dir.parent / "reach28" / name).write_text((game_dir / name).read_text())
    with pytest.raises(SuiteError, match="does not match"):
        load_suite(str(tmp_path)).spec("reach28")


def test_entry_loads_games_outside_the_engine(tmp_path):
    write_broken_game(tmp_path, "never-ending")
    suite = load_suite(str(tmp_path))
    env = suite.build_env("never-ending", seed=0)
    assert env.valid_moves() == [0, 1]


def test_missing_suite_directory(tmp_path):
    with pytest.raises(SuiteError):
        load_suite(str(tmp_path / "absent"))
