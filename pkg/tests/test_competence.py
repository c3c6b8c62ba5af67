import pytest

from engine.suite import load_suite
from harness.agents import MCTSAgent, RandomAgent
from harness.evaluation import run_eval
from rl.ppo import PPOConfig
from rl.selfplay import TrainingSchedule, train

pytestmark = pytest.mark.slow


def test_trained_reach27_agent_beats_random_moving_first():
    suite = load_suite()
    spec = suite.spec("reach27")
    make_env = lambda: suite.game_class(spec)(spec)  # noqa: E731
    run = train(make_env, TrainingSchedule(total_timesteps=40_000, checkpoint_interval=10_000), PPOConfig(), seed=0)
    assert run.pool.timesteps() == [10_000, 20_000, 30_000, 40_000]

    params = run.pool.latest().params
    # odd match indices seat the random agent first
    records, _ = run_eval(
        lambda: MCTSAgent(params, source="final"),
        RandomAgent,
        make_env,
        n_matches=200,
        base_seed=1,
    )
    moving_first = [record for record in records if record.first_seat == "A"]
    wins = sum(1 for record in moving_first if record.result_for("A") == "win")
    assert len(moving_first) == 100
    assert wins >= 90
