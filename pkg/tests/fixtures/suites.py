import shutil
from pathlib import Path
from typing import Optional

REPO_GAMES = Path(__file__).resolve().parents[2] / "games"

BROKEN = {
    "wrong-observation": ("WrongObservation", 9, 3),
    "step-raises": ("StepRaises", 9, 2),
    "never-ending": ("NeverEnding", 2, 1),
    "seed-flaky": ("SeedFlaky", 9, 2),
}


def copy_game(root: Path, game_id: str) -> Path:
    target = Path(root) / game_id
    shutil.copytree(REPO_GAMES / game_id, target)
    return target


def write_game(
    root: Path,
    game_id: str,
    entry: Optional[str],
    action_space_size: int,
    observation_dim: int,
    actions_text: Optional[str] = None,
    move_cap: int = 100,
) -> Path:
    game_dir = Path(root) / game_id
    game_dir.mkdir(parents=True, exist_ok=True)
    lines = [
        f"id = {game_id}",
        f"title = {game_id.replace('-', ' ').title()}",
        f"action_space_size = {action_space_size}",
        f"observation_dim = {observation_dim}",
        f"move_cap = {move_cap}",
        "stochastic_setup = false",
    ]
    if entry:
        lines.append(f"entry = {entry}")
    (game_dir / "meta").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (game_dir / "rules.md").write_text(f"# {game_id}\n\nTest fixture game.\n", encoding="utf-8")
    if actions_text is None:
        actions_text = "\n".join(f"- `{index}`: move {index}" for index in range(action_space_size)) + "\n"
    (game_dir / "actions.md").write_text(actions_text, encoding="utf-8")
    return game_dir


def write_broken_game(root: Path, game_id: str) -> Path:
    class_name, actions, obs_dim = BROKEN[game_id]
    return write_game(root, game_id, f"tests.fixtures.broken_games:{class_name}", actions, obs_dim)


def write_keyword_game(root: Path, game_id: str = "starred-actions") -> Path:
    """Reach 27 rules with an action map that still carries a ``**`` placeholder."""
    actions = "- `0`: add 1\n- `1`: add **N**\n" + "\n".join(f"- `{index}`: add {index + 1}" for index in range(2, 9)) + "\n"
    return write_game(root, game_id, "engine.games.reach27:Reach27", 9, 2, actions_text=actions)
