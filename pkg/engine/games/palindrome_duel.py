"""Palindrome Duel: add X or O to either end of a shared sequence; creating a palindrome of length 3+ loses."""
from dataclasses import dataclass
from typing import Any, Dict, List

from engine.core_env import ContractError, Outcome, Seat, TwoPlayerEnv

MAX_LENGTH = 11
MIN_PALINDROME = 3
SYMBOLS = ("X", "O")


def decode_action(action: int) -> "tuple[str, str]":
    """(symbol, end) for an action index: 0 X left, 1 X right, 2 O left, 3 O right."""
    return SYMBOLS[action // 2], ("left", "right")[action % 2]


def creates_palindrome(sequence: str, at_left: bool) -> bool:
    """True if some palindromic substring of length >= 3 touches the newly placed end."""
    for length in range(MIN_PALINDROME, len(sequence) + 1):
        window = sequence[:length] if at_left else sequence[len(sequence) - length:]
        if window == window[::-1]:
            return True
    return False


@dataclass
class PalindromeDuelState:
    sequence: str = ""


class PalindromeDuel(TwoPlayerEnv):
    GAME_ID = "palindrome-duel"
    TITLE = "Palindrome Duel"
    ACTION_SPACE_SIZE = 4
    OBSERVATION_DIM = 2 * MAX_LENGTH

    def _setup(self, options: Dict[str, Any]) -> None:
        sequence = str(options.get("sequence", ""))
        if len(sequence) >= MAX_LENGTH or set(sequence) - set(SYMBOLS):
            raise ContractError(f"palindrome-duel: sequence must be fewer than {MAX_LENGTH} X/O symbols")
        self.state = PalindromeDuelState(sequence=sequence)

    def _legal_actions(self) -> List[int]:
        return list(range(self.ACTION_SPACE_SIZE))

    def _apply(self, action: int) -> Outcome:
        symbol, end = decode_action(action)
        at_left = end == "left"
        sequence = symbol + self.state.sequence if at_left else self.state.sequence + symbol
        self.state.sequence = sequence
        if creates_palindrome(sequence, at_left):
            return Outcome.MOVER_LOSES
        if len(sequence) == MAX_LENGTH:
            return Outcome.MOVER_WINS
        return Outcome.CONTINUE

    def _encode(self, seat: Seat) -> List[float]:
        values = [0.0] * self.OBSERVATION_DIM
        for index, symbol in enumerate(self.state.sequence):
            values[2 * index + SYMBOLS.index(symbol)] = 1.0
        return values

    def _render_lines(self) -> List[str]:
        return [f"Sequence: {self.state.sequence or '(empty)'}", f"Length: {len(self.state.sequence)}/{MAX_LENGTH}"]
