"""
Exact solvers for the small games of the suite.

``solve_env`` is a memoised negamax over any environment that supports
``clone``/``state_key``. The rule-level oracles below compute the same
values from the game rules alone (retrograde analysis, Sprague-Grundy
numbers, prime-factor parity) so the two can be checked against each other.
"""
from functools import lru_cache
from typing import Dict, Hashable, List, Optional

from engine.core_env import TwoPlayerEnv
from engine.games.divide_conquer import is_smooth, omega
from engine.games.isolation import N_SQUARES
from engine.games.light_out import N_LIGHTS
from engine.games.reach27 import TARGET

DIVIDE_MAX_N = 64


def _terminal_value(reward: float) -> int:
    if reward > 0:
        return 1
    if reward < 0:
        return -1
    return 0


def solve_env(env: TwoPlayerEnv, memo: Optional[Dict[Hashable, int]] = None) -> int:
    """Game value for the player to move: +1 win, -1 loss, 0 draw under perfect play."""
    memo = {} if memo is None else memo

    def value(node: TwoPlayerEnv) -> int:
        key = node.state_key()
        if key in memo:
            return memo[key]
        best = -1
        for action in node.valid_moves():
            child = node.clone()
            outcome = child.step(action)
            if outcome.terminated or outcome.truncated:
                result = _terminal_value(outcome.reward)
            elif child.current_player == node.current_player:
                result = value(child)
            else:
                result = -value(child)
            if result > best:
                best = result
                if best == 1:
                    break
        memo[key] = best
        return best

    return value(env)


def winning_moves(env: TwoPlayerEnv) -> List[int]:
    """Moves that keep a won position won for the mover."""
    memo: Dict[Hashable, int] = {}
    moves = []
    for action in env.valid_moves():
        child = env.clone()
        outcome = child.step(action)
        if outcome.terminated:
            result = _terminal_value(outcome.reward)
        else:
            sign = 1 if child.current_player == env.current_player else -1
            result = sign * solve_env(child, memo)
        if result == 1:
            moves.append(action)
    return moves


def reach27_losing_totals(target: int = TARGET, max_add: int = 9) -> List[int]:
    """Totals below the target from which the player to move loses (retrograde analysis)."""
    wins = [False] * (target + 1)
    for total in range(target - 1, -1, -1):
        wins[total] = any(total + add == target or (total + add < target and not wins[total + add]) for add in range(1, max_add + 1))
    return [total for total in range(target) if not wins[total]]


def reach27_random_win_probability(total: int = 0, target: int = TARGET, max_add: int = 9) -> float:
    """Probability that the player to move wins when both sides add uniformly at random."""
    probs = [0.0] * (target + 1)
    for current in range(target - 1, -1, -1):
        acc = 0.0
        for add in range(1, max_add + 1):
            reached = current + add
            if reached == target:
                acc += 1.0
            elif reached < target:
                acc += 1.0 - probs[reached]
        probs[current] = acc / max_add
    return probs[total]


def _mex(values) -> int:
    seen = set(values)
    result = 0
    while result in seen:
        result += 1
    return result


@lru_cache(maxsize=None)
def kayles_grundy(n: int) -> int:
    """Grundy value of a row of n lights where a move removes one light or two adjacent ones."""
    if n <= 0:
        return 0
    options = set()
    for width in (1, 2):
        for left in range(0, n - width + 1):
            options.add(kayles_grundy(left) ^ kayles_grundy(n - width - left))
    return _mex(options)


@lru_cache(maxsize=None)
def node_kayles_path_grundy(n: int) -> int:
    """Grundy value of an empty line of n squares where a claim also blocks both neighbours."""
    if n <= 0:
        return 0
    options = set()
    for square in range(n):
        left = max(square - 1, 0)
        right = max(n - square - 2, 0)
        options.add(node_kayles_path_grundy(left) ^ node_kayles_path_grundy(right))
    return _mex(options)


def divide_first_player_wins(n: int) -> bool:
    """Every division removes one prime factor, so only the parity of the factor count matters."""
    return omega(n) % 2 == 1


def divide_winning_starts(max_n: int = DIVIDE_MAX_N) -> List[int]:
    return [n for n in range(2, max_n + 1) if is_smooth(n) and divide_first_player_wins(n)]


def divide_smooth_starts(max_n: int = DIVIDE_MAX_N) -> List[int]:
    return [n for n in range(2, max_n + 1) if is_smooth(n)]


def compute_game_values() -> dict:
    """Rule-level values of the initial positions, in the layout of tests/golden/game_values.json."""
    from engine.games.order_challenge import OrderChallenge
    from engine.games.palindrome_duel import PalindromeDuel

    return {
        "reach27": {"losing_totals": reach27_losing_totals(), "first_player_wins": 0 not in reach27_losing_totals()},
        "light-out-duel": {"grundy": kayles_grundy(N_LIGHTS), "first_player_wins": kayles_grundy(N_LIGHTS) != 0},
        "isolation": {"grundy": node_kayles_path_grundy(N_SQUARES), "first_player_wins": node_kayles_path_grundy(N_SQUARES) != 0},
        "order-challenge": {"first_player_wins": solve_env(OrderChallenge()) == 1},
        "palindrome-duel": {"first_player_wins": solve_env(PalindromeDuel()) == 1},
        "divide-and-conquer": {"max_n": DIVIDE_MAX_N, "first_player_wins": divide_winning_starts()},
    }
