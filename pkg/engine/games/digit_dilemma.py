"""
Digit Dilemma.

Twenty random digits form a line. Players alternately take a digit from
either end and append it to their own number. When the line is empty the
larger ten-digit number wins (leading zeros allowed); ties go to the
second mover.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List

from engine.core_env import ContractError, Outcome, Seat, TwoPlayerEnv

LINE_LENGTH = 20
HAND_LENGTH = LINE_LENGTH // 2


@dataclass
class DigitDilemmaState:
    line: List[int] = field(default_factory=list)
    p1_digits: List[int] = field(default_factory=list)
    p2_digits: List[int] = field(default_factory=list)

    def digits(self, seat: Seat) -> List[int]:
        return self.p1_digits if seat is Seat.P1 else self.p2_digits


def _as_digits(value: Any) -> List[int]:
    return [int(ch) for ch in value] if isinstance(value, str) else [int(d) for d in value]


class DigitDilemma(TwoPlayerEnv):
    GAME_ID = "digit-dilemma"
    TITLE = "Digit Dilemma"
    ACTION_SPACE_SIZE = 2
    OBSERVATION_DIM = LINE_LENGTH + 2 * HAND_LENGTH
    STOCHASTIC_SETUP = True

    def _setup(self, options: Dict[str, Any]) -> None:
        if "line" in options:
            line = _as_digits(options["line"])
        else:
            line = self.rng.digits(LINE_LENGTH)
        p1 = _as_digits(options.get("p1_digits", []))
        p2 = _as_digits(options.get("p2_digits", []))
        if not line or len(line) + len(p1) + len(p2) > LINE_LENGTH or any(not 0 <= d <= 9 for d in line + p1 + p2):
            raise ContractError(f"digit-dilemma: line and hands must hold at most {LINE_LENGTH} digits, line non-empty")
        self.state = DigitDilemmaState(line=line, p1_digits=p1, p2_digits=p2)

    def _legal_actions(self) -> List[int]:
        return [0, 1]

    def _apply(self, action: int) -> Outcome:
        mover = self.current_player
        digit = self.state.line.pop(0) if action == 0 else self.state.line.pop()
        self.state.digits(mover).append(digit)
        if self.state.line:
            return Outcome.CONTINUE
        winner = Seat.P1 if self.state.p1_digits > self.state.p2_digits else Seat.P2
        return Outcome.MOVER_WINS if winner is mover else Outcome.MOVER_LOSES

    def _encode(self, seat: Seat) -> List[float]:
        def slots(digits: List[int], width: int) -> List[float]:
            values = [(d + 1) / 10 for d in digits[:width]]
            return values + [0.0] * (width - len(values))

        return slots(self.state.line, LINE_LENGTH) + slots(self.state.digits(seat), HAND_LENGTH) + slots(self.state.digits(seat.other), HAND_LENGTH)

    def _render_lines(self) -> List[str]:
        return [
            f"Line: {' '.join(map(str, self.state.line)) or 'empty'}",
            f"Player 1 number: {''.join(map(str, self.state.p1_digits)) or '-'}",
            f"Player 2 number: {''.join(map(str, self.state.p2_digits)) or '-'}",
        ]
