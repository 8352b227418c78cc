import dill
import numpy as np
import pytest
from pytest import raises

from snnuq.datastructures.core import (
    OptimizerConfig,
    OptimizerState,
    lookahead_sync,
    optimizer_step,
    radam_step,
)
from snnuq.datastructures.core.optimizer import clip_gradients
from snnuq.errors import ContractError, ShapeError


def _state(params, **kwargs):
    return OptimizerState.for_parameters(OptimizerConfig(**kwargs), params)


def test_defaults():
    cfg = OptimizerConfig()
    assert cfg.learning_rate == 0.0003
    assert (cfg.beta1, cfg.beta2, cfg.epsilon) == (0.9, 0.999, 1e-8)
    assert cfg.sync_period == 6
    assert cfg.slow_step == 0.5
    assert cfg.clip_norm == 0.0


def test_rho_at_first_step():
    cfg = OptimizerConfig()
    assert cfg.rho_inf == pytest.approx(1999.0)
    assert cfg.rho(1) == pytest.approx(1.0, abs=1e-8)


def test_first_step_is_momentum():
    params = [np.array([1.0, -2.0]), np.array([[0.5]])]
    grads = [np.array([0.3, 0.1]), np.array([[-4.0]])]
    before = [p.copy() for p in params]
    state = _state(params)

    radam_step(state, params, grads)
    assert state.step == 1
    assert state.last_rectified is False
    for old, new, grad in zip(before, params, grads):
        assert np.allclose(new, old - 0.0003 * grad, rtol=0, atol=1e-15)


def test_branch_switches_after_fourth_step():
    params = [np.zeros(3)]
    state = _state(params)
    branches = []
    for _ in range(6):
        radam_step(state, params, [np.ones(3)])
        branches.append(state.last_rectified)
    assert branches == [False, False, False, False, True, True]


def test_momentum_branch_ignores_second_moments():
    grads_stream = np.random.default_rng(0).normal(size=(4, 5))
    params_a, params_b = [np.zeros(5)], [np.zeros(5)]
    state_a, state_b = _state(params_a), _state(params_b)
    state_b.second_moments[0][...] = 1e6

    for grads in grads_stream:
        radam_step(state_a, params_a, [grads])
        radam_step(state_b, params_b, [grads])
        assert state_a.last_rectified is False
        assert params_a[0].tobytes() == params_b[0].tobytes()


def test_zero_gradients_are_a_fixed_point():
    params = [np.array([1.5, -0.5]), np.array([[2.0, 3.0]])]
    before = [p.copy() for p in params]
    state = _state(params)
    for _ in range(20):
        optimizer_step(state, params, [np.zeros_like(p) for p in params])
    for old, new in zip(before, params):
        assert np.array_equal(old, new)


def test_quadratic_decreases_monotonically():
    theta = [np.array([1.0])]
    state = _state(theta)
    previous = 1.0
    for _ in range(100):
        radam_step(state, theta, [theta[0].copy()])
        current = abs(float(theta[0][0]))
        assert current < previous
        previous = current


def test_lookahead_with_unit_step_keeps_fast_weights():
    params = [np.array([2.0, -1.0])]
    state = _state(params, slow_step=1.0)
    state.step = 6
    lookahead_sync(state, params)
    assert params[0].tolist() == [2.0, -1.0]
    assert state.slow_weights[0].tolist() == [2.0, -1.0]
    assert state.syncs == 1


def test_lookahead_midpoint():
    params = [np.array([2.0])]
    state = _state(params)
    state.slow_weights[0][...] = 0.0
    state.step = 6
    lookahead_sync(state, params)
    assert params[0].tolist() == [1.0]
    assert state.slow_weights[0].tolist() == [1.0]


def test_lookahead_only_on_period():
    params = [np.array([2.0])]
    state = _state(params)
    state.slow_weights[0][...] = 0.0
    for step in (0, 1, 5, 7):
        state.step = step
        lookahead_sync(state, params)
    assert params[0].tolist() == [2.0]
    assert state.syncs == 0


def test_twelve_steps_sync_twice():
    rng = np.random.default_rng(1)
    params = [rng.normal(size=4)]
    state = _state(params)
    synced_at = []
    for step in range(1, 13):
        before = state.syncs
        optimizer_step(state, params, [rng.normal(size=4)])
        if state.syncs != before:
            synced_at.append(step)
    assert synced_at == [6, 12]
    assert np.array_equal(params[0], state.slow_weights[0])


def test_training_is_deterministic():
    def run():
        rng = np.random.default_rng(2)
        params = [rng.normal(size=(3, 3)), rng.normal(size=3)]
        state = _state(params)
        for _ in range(25):
            optimizer_step(state, params,
                           [rng.normal(size=p.shape) for p in params])
        return b"".join(p.tobytes() for p in params)

    assert run() == run()


def test_state_pickle_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    params = [rng.normal(size=(2, 3)), rng.normal(size=3)]
    state = _state(params, sync_period=4)
    for _ in range(7):
        optimizer_step(state, params, [rng.normal(size=p.shape)
                                       for p in params])

    path = str(tmp_path / "optimizer.pkl")
    state.pickle(path)
    restored = OptimizerState.unpickle(path)

    assert restored.step == 7
    assert restored.syncs == 1
    assert restored.config == state.config
    for name in ("first_moments", "second_moments", "slow_weights"):
        for a, b in zip(getattr(state, name), getattr(restored, name)):
            assert a.tobytes() == b.tobytes()


def test_unpickle_wrong_type(tmp_path):
    path = str(tmp_path / "other.pkl")
    with open(path, "wb") as pkl:
        dill.dump({"step": 3}, pkl)
    with raises(TypeError):
        OptimizerState.unpickle(path)


def test_shape_mismatch():
    params = [np.zeros(3)]
    state = _state(params)
    with raises(ShapeError):
        radam_step(state, params, [np.zeros(4)])
    with raises(ShapeError):
        radam_step(state, [np.zeros(3), np.zeros(1)], [np.zeros(3)])


@pytest.mark.parametrize(
    "kwargs",
    [
        {"learning_rate": 0.0},
        {"beta1": 1.0},
        {"beta2": 0.0},
        {"epsilon": -1e-8},
        {"sync_period": 0},
        {"slow_step": 0.0},
        {"slow_step": 1.5},
        {"clip_norm": -1.0},
    ],
)
def test_invalid_config(kwargs):
    with raises(ContractError):
        OptimizerConfig(**kwargs)


def test_negative_step():
    with raises(ContractError):
        OptimizerState(OptimizerConfig(), [], [], [], step=-1)


def test_clip_gradients():
    grads, norm = clip_gradients([np.array([3.0]), np.array([4.0])], 1.0)
    assert norm == 5.0
    assert np.allclose(np.concatenate(grads), [0.6, 0.8])

    same, _ = clip_gradients([np.array([0.3])], 1.0)
    assert same[0].tolist() == [0.3]


def test_clipped_warmup_steps_stay_small():
    params = [np.zeros(4), np.zeros((2, 2))]
    state = _state(params, learning_rate=0.003, clip_norm=1.0)
    grads = [np.full(4, 1e6), np.full((2, 2), -1e6)]
    for _ in range(4):
        before = [p.copy() for p in params]
        radam_step(state, params, grads)
        assert state.last_rectified is False
        moved = np.sqrt(sum(np.sum((p - b) ** 2)
                            for p, b in zip(params, before)))
        assert moved <= 0.003 + 1e-12
