"""
Game suite loader.

A suite is a directory with one sub-directory per game::

    games/<id>/rules.md     rulebook shown to agents
    games/<id>/actions.md   action index -> move description
    games/<id>/meta         key = value record (id, title, action_space_size, ...)

The meta record is validated against ``schemas/game_meta.schema.json``.
"""
import importlib
from pathlib import Path
from typing import Dict, List, Optional, Type

from engine.core_env import DEFAULT_MOVE_CAP, GameSpec, SuiteError, TwoPlayerEnv
from engine.games import REGISTRY
from runtime.config import REPO_ROOT, ConfigError, parse_config_text
from runtime.schema_validate import record_errors

META_FILE = "meta"
RULES_FILE = "rules.md"
ACTIONS_FILE = "actions.md"

_INT_KEYS = ("action_space_size", "observation_dim", "move_cap")


def _coerce_meta(raw: Dict[str, str], path: Path) -> dict:
    meta: dict = dict(raw)
    for key in _INT_KEYS:
        if key in meta:
            try:
                meta[key] = int(meta[key])
            except ValueError as exc:
                raise SuiteError(f"{path}: {key} is not an integer: {meta[key]!r}") from exc
    meta.setdefault("move_cap", DEFAULT_MOVE_CAP)
    if "stochastic_setup" in meta:
        lowered = str(meta["stochastic_setup"]).lower()
        if lowered not in ("true", "false"):
            raise SuiteError(f"{path}: stochastic_setup must be true or false")
        meta["stochastic_setup"] = lowered == "true"
    return meta


def read_meta(path: Path) -> dict:
    try:
        raw = parse_config_text(path.read_text(encoding="utf-8"), source=str(path))
    except (OSError, UnicodeDecodeError, ConfigError) as exc:
        raise SuiteError(f"{path}: cannot read game meta ({exc})") from exc
    meta = _coerce_meta(raw, path)
    errors = record_errors("game_meta.schema.json", meta)
    if errors:
        raise SuiteError(f"{path}: invalid game meta: {'; '.join(errors)}")
    return meta


class GameSuite:
    def __init__(self, root: str):
        self.root = Path(root)
        if not self.root.is_dir():
            raise SuiteError(f"{self.root}: suite directory not found")
        self._specs: Dict[str, GameSpec] = {}

    def ids(self) -> List[str]:
        return sorted(child.name for child in self.root.iterdir() if (child / META_FILE).is_file())

    def spec(self, game_id: str) -> GameSpec:
        if game_id in self._specs:
            return self._specs[game_id]
        game_dir = self.root / game_id
        if not (game_dir / META_FILE).is_file():
            raise SuiteError(f"unknown game id {game_id!r} (no {game_dir / META_FILE})")
        meta = read_meta(game_dir / META_FILE)
        if meta["id"] != game_id:
            raise SuiteError(f"{game_dir / META_FILE}: id {meta['id']!r} does not match directory name")
        texts = {}
        for name in (RULES_FILE, ACTIONS_FILE):
            try:
                texts[name] = (game_dir / name).read_text(encoding="utf-8")
            except OSError as exc:
                raise SuiteError(f"{game_dir / name}: cannot read ({exc})") from exc
        try:
            spec = GameSpec(
                id=meta["id"],
                title=meta["title"],
                rulebook_text=texts[RULES_FILE],
                action_map_text=texts[ACTIONS_FILE],
                action_space_size=meta["action_space_size"],
                observation_dim=meta["observation_dim"],
                move_cap=meta["move_cap"],
                stochastic_setup=meta["stochastic_setup"],
                entry=meta.get("entry"),
                observation_doc=meta.get("observation", ""),
            )
        except ValueError as exc:
            raise SuiteError(f"{game_dir}: {exc}") from exc
        self._specs[game_id] = spec
        return spec

    def specs(self) -> List[GameSpec]:
        return [self.spec(game_id) for game_id in self.ids()]

    def game_class(self, spec: GameSpec) -> Type[TwoPlayerEnv]:
        if spec.entry:
            module_name, _, class_name = spec.entry.partition(":")
            try:
                return getattr(importlib.import_module(module_name), class_name)
            except (ImportError, AttributeError) as exc:
                raise SuiteError(f"game {spec.id}: cannot load entry {spec.entry!r} ({exc})") from exc
        try:
            return REGISTRY[spec.id]
        except KeyError as exc:
            raise SuiteError(f"game {spec.id}: no engine implementation and no entry in meta") from exc

    def build_env(self, game_id: str, seed: Optional[int] = None) -> TwoPlayerEnv:
        spec = self.spec(game_id)
        env = self.game_class(spec)(spec)
        env.reset(seed=seed)
        return env


def default_suite_root() -> str:
    return str(REPO_ROOT / "games")


def load_suite(path: Optional[str] = None) -> GameSuite:
    return GameSuite(path or default_suite_root())


def build_env(spec_id: str, seed: Optional[int] = None, suite_path: Optional[str] = None) -> TwoPlayerEnv:
    """Fresh environment for a suite game; unknown ids raise SuiteError."""
    return load_suite(suite_path).build_env(spec_id, seed=seed)
