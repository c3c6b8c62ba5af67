import numpy as np
import pytest

from engine.core_env import ContractError
from rl.network import (
    PolicyParams,
    backward,
    forward,
    forward_batch,
    greedy_action,
    masked_distribution,
    masked_log_softmax,
    valid_mask,
)


def random_params(obs_dim=3, n_actions=4, seed=0, scale=0.3):
    rng = np.random.default_rng(seed)
    shapes = PolicyParams.shapes(obs_dim, n_actions)
    return PolicyParams(**{name: rng.normal(0.0, scale, size=shape) for name, shape in shapes.items()})


def test_zero_weights_give_uniform_logits():
    params = PolicyParams.zeros(5, 7)
    logits, value = forward(params, np.ones(5, dtype=np.float32))
    assert logits.tolist() == [0.0] * 7
    assert value == 0.0


def test_forward_is_deterministic_and_checks_shape():
    params = PolicyParams.init(4, 3, np.random.default_rng(1))
    obs = np.array([0.1, 0.2, 0.3, 0.4], dtype=np.float32)
    first = forward(params, obs)
    second = forward(params, obs)
    assert np.array_equal(first[0], second[0])
    assert first[1] == second[1]
    assert np.all(np.isfinite(first[0]))
    with pytest.raises(ContractError):
        forward(params, np.zeros(5))
    with pytest.raises(ContractError):
        forward(params, np.zeros((2, 4)))


def test_init_shapes_and_dtype():
    params = PolicyParams.init(11, 9, np.random.default_rng(0))
    assert params.w1.shape == (11, 64)
    assert params.w2.shape == (64, 64)
    assert params.wp.shape == (64, 9)
    assert params.wv.shape == (64, 1)
    assert all(tensor.dtype == np.float32 for _, tensor in params.items())
    assert not np.any(params.b1)
    assert params.is_finite()


def test_masked_distribution_examples():
    probs = masked_distribution(np.zeros(6), [2, 5])
    assert probs[2] == pytest.approx(0.5)
    assert probs[5] == pytest.approx(0.5)
    assert probs[[0, 1, 3, 4]].tolist() == [0.0, 0.0, 0.0, 0.0]

    assert masked_distribution(np.array([3.0, -1.0, 2.0]), [1]).tolist() == [0.0, 1.0, 0.0]

    probs = masked_distribution(np.array([1.0, 0.0]), [0, 1])
    assert probs == pytest.approx([0.7311, 0.2689], abs=1e-4)


def test_masked_distribution_normalises_random_logits():
    rng = np.random.default_rng(3)
    for _ in range(50):
        logits = rng.normal(0.0, 5.0, size=9)
        valid = sorted(set(rng.integers(0, 9, size=4).tolist()))
        probs = masked_distribution(logits, valid)
        assert probs.sum() == pytest.approx(1.0, abs=1e-6)
        assert np.all(probs[valid] > 0)
        off = [index for index in range(9) if index not in valid]
        assert not np.any(probs[off])


def test_empty_or_out_of_range_valid_set_is_rejected():
    with pytest.raises(ContractError):
        masked_distribution(np.zeros(3), [])
    with pytest.raises(ContractError):
        valid_mask([3], 3)


def test_greedy_action_prefers_lowest_index_on_ties():
    assert greedy_action(np.array([0.2, 0.4, 0.4])) == 1


def _numeric_check(params, loss_fn, analytic, samples_per_tensor=30, eps=1e-6, seed=0):
    rng = np.random.default_rng(seed)
    for name, tensor in params.items():
        flat = tensor.reshape(-1)
        picks = rng.choice(flat.size, size=min(samples_per_tensor, flat.size), replace=False)
        numeric = np.zeros(len(picks))
        for slot, index in enumerate(picks):
            saved = flat[index]
            flat[index] = saved + eps
            plus = loss_fn()
            flat[index] = saved - eps
            minus = loss_fn()
            flat[index] = saved
            numeric[slot] = (plus - minus) / (2 * eps)
        exact = analytic[name].reshape(-1)[picks]
        error = np.linalg.norm(numeric - exact) / max(np.linalg.norm(numeric) + np.linalg.norm(exact), 1e-12)
        assert error < 1e-4, name


def test_log_prob_and_value_gradients_match_finite_differences():
    params = random_params()
    obs = np.array([[0.5, -0.2, 0.9]])
    action = 2
    mask = np.ones((1, 4), dtype=bool)

    def objective():
        logits, values, _ = forward_batch(params, obs)
        return float(masked_log_softmax(logits, mask)[0, action] + values[0])

    logits, _, cache = forward_batch(params, obs)
    probs = np.exp(masked_log_softmax(logits, mask))
    onehot = np.zeros_like(probs)
    onehot[0, action] = 1.0
    grads = backward(params, cache, onehot - probs, np.ones(1))
    _numeric_check(params, objective, grads)
