"""
Cross Over.

An 11-square track (0..10). Player 1 starts with pieces A, B, C on squares
0, 1, 2 and moves them upward; Player 2 starts with A, B, C on 10, 9, 8 and
moves them downward. A move advances one piece by one or two squares. Pieces
may pass over other pieces but may not land on a friendly piece; landing on
an enemy piece captures it. Landing inside the opponent's territory
(Player 2 owns 8..10, Player 1 owns 0..2) or capturing the last enemy piece wins.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from engine.core_env import ContractError, Outcome, Seat, TwoPlayerEnv

TRACK_END = 10
LABELS = ("A", "B", "C")
P1_TERRITORY = frozenset({0, 1, 2})
P2_TERRITORY = frozenset({8, 9, 10})


def decode_action(action: int) -> "tuple[int, int]":
    """(piece index, steps) for an action index."""
    return action // 2, action % 2 + 1


@dataclass
class CrossOverState:
    p1_pieces: List[Optional[int]] = field(default_factory=lambda: [0, 1, 2])
    p2_pieces: List[Optional[int]] = field(default_factory=lambda: [10, 9, 8])

    def pieces(self, seat: Seat) -> List[Optional[int]]:
        return self.p1_pieces if seat is Seat.P1 else self.p2_pieces


def _direction(seat: Seat) -> int:
    return 1 if seat is Seat.P1 else -1


def _enemy_territory(seat: Seat) -> frozenset:
    return P2_TERRITORY if seat is Seat.P1 else P1_TERRITORY


class CrossOver(TwoPlayerEnv):
    GAME_ID = "cross-over"
    TITLE = "Cross Over"
    ACTION_SPACE_SIZE = 2 * len(LABELS)
    OBSERVATION_DIM = 4 * len(LABELS)

    def _setup(self, options: Dict[str, Any]) -> None:
        state = CrossOverState()
        for key in ("p1_pieces", "p2_pieces"):
            if key in options:
                pieces = [None if pos is None else int(pos) for pos in options[key]]
                alive = [pos for pos in pieces if pos is not None]
                if len(pieces) != len(LABELS) or len(set(alive)) != len(alive) or any(not 0 <= pos <= TRACK_END for pos in alive):
                    raise ContractError(f"cross-over: {key} must list 3 distinct on-track positions (None for captured)")
                setattr(state, key, pieces)
        if set(p for p in state.p1_pieces if p is not None) & set(p for p in state.p2_pieces if p is not None):
            raise ContractError("cross-over: players cannot share a square")
        self.state = state

    def _moves_for(self, seat: Seat) -> List[int]:
        own = self.state.pieces(seat)
        occupied = {pos for pos in own if pos is not None}
        moves = []
        for action in range(self.ACTION_SPACE_SIZE):
            piece, steps = decode_action(action)
            pos = own[piece]
            if pos is None:
                continue
            dest = pos + steps * _direction(seat)
            if 0 <= dest <= TRACK_END and dest not in occupied:
                moves.append(action)
        return moves

    def _legal_actions(self) -> List[int]:
        return self._moves_for(self.current_player)

    def _apply(self, action: int) -> Outcome:
        mover = self.current_player
        piece, steps = decode_action(action)
        own = self.state.pieces(mover)
        rival = self.state.pieces(mover.other)
        dest = own[piece] + steps * _direction(mover)
        own[piece] = dest
        for index, pos in enumerate(rival):
            if pos == dest:
                rival[index] = None
        if dest in _enemy_territory(mover):
            return Outcome.MOVER_WINS
        if all(pos is None for pos in rival):
            return Outcome.MOVER_WINS
        if not self._moves_for(mover.other):
            return Outcome.MOVER_WINS
        return Outcome.CONTINUE

    def _encode(self, seat: Seat) -> List[float]:
        values: List[float] = []
        for side in (seat, seat.other):
            for pos in self.state.pieces(side):
                if pos is None:
                    values += [0.0, 0.0]
                else:
                    # distance travelled from Player 1's end, mirrored for Player 2
                    offset = pos if seat is Seat.P1 else TRACK_END - pos
                    values += [1.0, offset / TRACK_END]
        return values

    def _render_lines(self) -> List[str]:
        cells = ["." for _ in range(TRACK_END + 1)]
        for seat in (Seat.P1, Seat.P2):
            for label, pos in zip(LABELS, self.state.pieces(seat)):
                if pos is not None:
                    cells[pos] = f"{label}{int(seat)}"
        lines = ["Track: " + " ".join(f"{index}:{cell}" for index, cell in enumerate(cells))]
        for seat in (Seat.P1, Seat.P2):
            pieces = ", ".join(f"{label}@{pos}" if pos is not None else f"{label} captured" for label, pos in zip(LABELS, self.state.pieces(seat)))
            lines.append(f"{seat.label} pieces: {pieces}")
        return lines
