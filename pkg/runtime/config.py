"""
Run configuration.

Precedence, lowest first: dataclass defaults, environment variables
(ARENA_SUITE / ARENA_OUTPUT / ARENA_SEED), the profile schedule, the
``key = value`` config file, command-line flags.
"""
import dataclasses
import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

REPO_ROOT = Path(__file__).resolve().parent.parent

PROFILES: Dict[str, Dict[str, int]] = {
    "paper": {"total_timesteps": 1_000_000, "checkpoint_interval": 250_000, "move_cap": 100},
    "desk": {"total_timesteps": 200_000, "checkpoint_interval": 50_000, "move_cap": 100},
}

PPO_KEYS = {
    "learning_rate": float,
    "gamma": float,
    "gae_lambda": float,
    "clip_range": float,
    "batch_size": int,
    "rollout_length": int,
    "epochs_per_update": int,
    "value_coef": float,
    "entropy_coef": float,
    "max_grad_norm": float,
}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


class ConfigError(ValueError):
    pass


def default_suite_path() -> str:
    return os.environ.get("ARENA_SUITE") or os.fspath(REPO_ROOT / "games")


def default_output_dir() -> str:
    return os.environ.get("ARENA_OUTPUT") or os.fspath(REPO_ROOT / "artifacts")


def default_seed() -> int:
    raw = os.environ.get("ARENA_SEED")
    if raw is None or not raw.strip():
        return 0
    try:
        return int(raw, 0)
    except ValueError as exc:
        raise ConfigError(f"ARENA_SEED: not an integer: {raw!r}") from exc


@dataclasses.dataclass
class RunConfig:
    suite_path: str = dataclasses.field(default_factory=default_suite_path)
    output_dir: str = dataclasses.field(default_factory=default_output_dir)
    seed: int = dataclasses.field(default_factory=default_seed)
    profile: str = "paper"
    total_timesteps: int = 1_000_000
    checkpoint_interval: int = 250_000
    epsilon_start: float = 1.0
    epsilon_end: float = 0.1
    move_cap: int = 100
    mcts_rollouts: int = 100
    n_eval_matches: int = 30
    max_reprompts: int = 3
    move_timeout: float = 120.0
    parallelism: int = 1
    mask_invalid: bool = True
    execution_games: int = 100
    timeout_games: int = 10
    wall_budget: float = 60.0
    selection_matches: int = 6
    use_mcts: bool = True
    ppo_overrides: Dict[str, Any] = dataclasses.field(default_factory=dict)

    def validate(self) -> "RunConfig":
        if self.profile not in PROFILES:
            raise ConfigError(f"profile: expected one of {sorted(PROFILES)}, got {self.profile!r}")
        if self.profile == "paper":
            for key, value in PROFILES["paper"].items():
                if getattr(self, key) != value:
                    raise ConfigError(f"{key}: the paper profile fixes this value at {value}")
        if self.checkpoint_interval < 1 or self.total_timesteps % self.checkpoint_interval:
            raise ConfigError("checkpoint_interval must divide total_timesteps")
        for key in ("move_cap", "mcts_rollouts", "n_eval_matches", "parallelism", "selection_matches", "execution_games", "timeout_games"):
            if getattr(self, key) < 1:
                raise ConfigError(f"{key}: must be positive")
        if self.max_reprompts < 0:
            raise ConfigError("max_reprompts: must be non-negative")
        if self.move_timeout <= 0 or self.wall_budget <= 0:
            raise ConfigError("move_timeout and wall_budget must be positive")
        if not 0.0 <= self.epsilon_end <= self.epsilon_start <= 1.0:
            raise ConfigError("epsilon schedule must satisfy 0 <= epsilon_end <= epsilon_start <= 1")
        return self

    def to_text(self) -> str:
        """Effective config in the same ``key = value`` format the parser reads."""
        lines = []
        for field in dataclasses.fields(self):
            if field.name == "ppo_overrides":
                continue
            lines.append(f"{field.name} = {_format_value(getattr(self, field.name))}")
        for key, value in self.ppo_overrides.items():
            lines.append(f"ppo.{key} = {_format_value(value)}")
        return "\n".join(sorted(lines)) + "\n"


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _parse_int(text: str) -> int:
    cleaned = text.replace("_", "")
    try:
        return int(cleaned, 0)
    except ValueError:
        value = float(cleaned)
        if not value.is_integer():
            raise
        return int(value)


def _coerce(key: str, kind: Any, raw: Any, source: str) -> Any:
    if not isinstance(raw, str):
        raw = str(raw)
    text = raw.strip()
    try:
        if kind is bool or kind == "bool":
            lowered = text.lower()
            if lowered in _TRUE:
                return True
            if lowered in _FALSE:
                return False
            raise ValueError(text)
        if kind is int or kind == "int":
            return _parse_int(text)
        if kind is float or kind == "float":
            return float(text)
    except ValueError as exc:
        raise ConfigError(f"{source}: {key}: cannot parse {raw!r} as {getattr(kind, '__name__', kind)}") from exc
    return text


def parse_config_text(text: str, source: str = "<config>") -> Dict[str, str]:
    """Parse ``key = value`` lines; blank lines and ``#`` comments are ignored."""
    values: Dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {stripped!r}")
        key, value = stripped.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        values[key] = value.strip()
    return values


def load_config_file(path: str) -> Dict[str, str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config file ({exc})") from exc
    return parse_config_text(text, source=path)


def build_run_config(
    file_values: Optional[Mapping[str, Any]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
    source: str = "<config>",
) -> RunConfig:
    """Merge profile, file values and flag overrides (None overrides are skipped) into a RunConfig."""
    kinds = {field.name: field.type for field in dataclasses.fields(RunConfig) if field.name != "ppo_overrides"}
    merged: Dict[str, Any] = {}
    ppo: Dict[str, Any] = {}

    def absorb(values: Mapping[str, Any], origin: str) -> None:
        for key, raw in values.items():
            if raw is None:
                continue
            if key.startswith("ppo."):
                name = key[len("ppo."):]
                if name not in PPO_KEYS:
                    raise ConfigError(f"{origin}: unknown PPO key {key!r}")
                ppo[name] = _coerce(key, PPO_KEYS[name], raw, origin)
            elif key in kinds:
                merged[key] = _coerce(key, kinds[key], raw, origin)
            else:
                raise ConfigError(f"{origin}: unknown config key {key!r}")

    absorb(file_values or {}, source)
    absorb(overrides or {}, "command line")

    profile = merged.get("profile", "paper")
    if profile not in PROFILES:
        raise ConfigError(f"profile: expected one of {sorted(PROFILES)}, got {profile!r}")
    config = RunConfig(**{**PROFILES[profile], **merged})
    config.ppo_overrides = dict(sorted(ppo.items()))
    return config.validate()
