from typing import Dict, Type

from engine.core_env import TwoPlayerEnv
from engine.games.cross_over import CrossOver
from engine.games.digit_dilemma import DigitDilemma
from engine.games.divide_conquer import DivideAndConquer
from engine.games.isolation import Isolation
from engine.games.light_out import LightOutDuel
from engine.games.number_duel import NumberDuel
from engine.games.order_challenge import OrderChallenge
from engine.games.palindrome_duel import PalindromeDuel
from engine.games.prime_claim import PrimeClaim
from engine.games.reach27 import Reach27

REGISTRY: Dict[str, Type[TwoPlayerEnv]] = {
    cls.GAME_ID: cls
    for cls in (
        Reach27,
        LightOutDuel,
        DivideAndConquer,
        NumberDuel,
        CrossOver,
        PrimeClaim,
        Isolation,
        PalindromeDuel,
        OrderChallenge,
        DigitDilemma,
    )
}
