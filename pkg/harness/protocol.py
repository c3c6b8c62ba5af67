"""
Prompt text and wire records shared by external agents and the console player.

External agents speak newline-delimited JSON over stdin/stdout:

    -> {"type": "init", "game_description": ..., "action_description": ...}
    <- {"type": "ready"}
    -> {"type": "move_request", "board": ..., "legal_moves": [...], "reprompt": k}
    <- {"type": "move", "action": n}

The text blocks are the same ones an LLM adapter would concatenate into its
system and per-turn prompts.
"""
import json
from typing import Any, Dict, List, Optional, Sequence

from engine.core_env import GameSpec

SYSTEM_PROMPT = (
    "Here is a description for a two-player game:\n"
    "{game_description}\n"
    "\n"
    "You will be prompted with a board state and a list of legal moves for the current play. "
    "Your task is to pick the best move from this list. Here is a description for what each move represents:\n"
    "{move_description}"
)

TURN_PROMPT = (
    "{board}\n"
    "Legal moves: {legal_moves}\n"
    "Pick the best move from the list of legal moves. Respond with the number you wish to play. "
    "Do not include any other text in your response."
)


class ProtocolError(ValueError):
    pass


def system_prompt(spec: GameSpec) -> str:
    return SYSTEM_PROMPT.format(game_description=spec.rulebook_text.strip(), move_description=spec.action_map_text.strip())


def format_legal_moves(legal_moves: Sequence[int]) -> str:
    return ", ".join(str(move) for move in legal_moves)


def turn_prompt(board: str, legal_moves: Sequence[int]) -> str:
    return TURN_PROMPT.format(board=board, legal_moves=format_legal_moves(legal_moves))


def init_record(spec: GameSpec) -> Dict[str, Any]:
    return {"type": "init", "game_description": spec.rulebook_text, "action_description": spec.action_map_text}


def move_request_record(board: str, legal_moves: Sequence[int], reprompt: int) -> Dict[str, Any]:
    return {"type": "move_request", "board": board, "legal_moves": list(legal_moves), "reprompt": reprompt}


def encode_record(record: Dict[str, Any]) -> str:
    """One record per line; ``ensure_ascii`` keeps embedded newlines escaped."""
    return json.dumps(record, ensure_ascii=True, sort_keys=True) + "\n"


def decode_record(line: str) -> Dict[str, Any]:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"reply is not JSON: {line.strip()[:80]!r}") from exc
    if not isinstance(record, dict) or not isinstance(record.get("type"), str):
        raise ProtocolError(f"reply is not a typed record: {line.strip()[:80]!r}")
    return record


def parse_move(line: str) -> int:
    record = decode_record(line)
    if record["type"] != "move":
        raise ProtocolError(f"expected a move record, got {record['type']!r}")
    action = record.get("action")
    if isinstance(action, bool) or not isinstance(action, int):
        raise ProtocolError(f"move action is not an integer: {action!r}")
    return action


def parse_ready(line: str) -> None:
    if decode_record(line)["type"] != "ready":
        raise ProtocolError(f"expected a ready record, got {line.strip()[:80]!r}")


def parse_console_move(text: Optional[str], legal_moves: List[int]) -> Optional[int]:
    """An integer from the legal list, or None for anything else."""
    if text is None:
        return None
    try:
        value = int(text.strip())
    except ValueError:
        return None
    return value if value in legal_moves else None
