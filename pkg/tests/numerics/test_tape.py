import numpy as np
import pytest
from pytest import raises

from snnuq.errors import ContractError
from snnuq.numerics import (
    SELU_ALPHA,
    SELU_LAMBDA,
    SELU_SATURATION,
    Node,
    Tape,
    add,
    backward,
    column,
    div,
    exp,
    log,
    masked_logsumexp,
    matmul,
    mul,
    reduce_mean,
    reduce_sum,
    row_normalize,
    selu,
    softplus,
    square,
    sub,
    transpose,
    value_of,
)

STEP = 1e-6


def _away_from_zero(x):
    return np.where(np.abs(x) < 1e-3, 0.5, x)


def _positive(x):
    return 0.5 + np.abs(x)


# name -> (builder of random operands, primitive applied to them)
PRIMITIVES = {
    "matmul": (lambda r: [r.normal(size=(3, 4)), r.normal(size=(4, 2))],
               matmul),
    "transpose": (lambda r: [r.normal(size=(3, 2))], transpose),
    "add_bias": (lambda r: [r.normal(size=(3, 4)), r.normal(size=4)], add),
    "sub": (lambda r: [r.normal(size=(3, 4)), r.normal(size=(3, 4))], sub),
    "mul": (lambda r: [r.normal(size=(3, 4)), r.normal(size=(1, 4))], mul),
    "div": (lambda r: [r.normal(size=(3, 4)),
                       _positive(r.normal(size=(3, 4)))], div),
    "square": (lambda r: [r.normal(size=(3, 4))], square),
    "exp": (lambda r: [r.normal(size=(3, 4))], exp),
    "log": (lambda r: [_positive(r.normal(size=(3, 4)))], log),
    "selu": (lambda r: [_away_from_zero(r.normal(size=(3, 4)))], selu),
    "softplus": (lambda r: [3.0 * r.normal(size=(3, 4))], softplus),
    "reduce_sum_rows": (lambda r: [r.normal(size=(3, 4))],
                        lambda x: reduce_sum(x, axis=1)),
    "reduce_sum_keepdims": (lambda r: [r.normal(size=(3, 4))],
                            lambda x: reduce_sum(x, axis=0, keepdims=True)),
    "reduce_mean": (lambda r: [r.normal(size=(3, 4))], reduce_mean),
    "column": (lambda r: [r.normal(size=(3, 4))], lambda x: column(x, 2)),
    "row_normalize": (lambda r: [r.normal(size=(3, 4))], row_normalize),
    "masked_logsumexp": (
        lambda r: [r.normal(size=(4, 4))],
        lambda x: masked_logsumexp(x, ~np.eye(4, dtype=bool))),
}


def _scalarize(out, weights):
    return reduce_sum(mul(out, weights))


def _numeric_gradient(fn, operands, index):
    base = [np.array(o, dtype=np.float64) for o in operands]
    grad = np.zeros_like(base[index])
    for position in np.ndindex(base[index].shape):
        shifted = [b.copy() for b in base]
        shifted[index][position] += STEP
        upper = float(value_of(fn(*shifted)))
        shifted[index][position] -= 2 * STEP
        lower = float(value_of(fn(*shifted)))
        grad[position] = (upper - lower) / (2 * STEP)
    return grad


def _relative_error(analytic, numeric, floor=1e-2):
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / scale))


def _analytic_gradients(fn, operands):
    tape = Tape()
    nodes = [tape.parameter(o) for o in operands]
    return backward(tape, fn(*nodes))


@pytest.mark.parametrize("name", sorted(PRIMITIVES))
def test_primitive_gradients(name):
    build, primitive = PRIMITIVES[name]
    for seed in range(100):
        rng = np.random.default_rng(seed)
        operands = build(rng)
        out_shape = np.shape(value_of(primitive(*operands)))
        weights = rng.normal(size=out_shape)

        def fn(*args):
            return _scalarize(primitive(*args), weights)

        analytic = _analytic_gradients(fn, operands)
        for index, grad in enumerate(analytic):
            numeric = _numeric_gradient(fn, operands, index)
            assert grad.shape == np.shape(operands[index])
            assert _relative_error(grad, numeric) < 1e-5, (name, seed)


def test_selu_points():
    assert selu(np.array(0.0)) == 0.0
    assert selu(np.array(1.0)) == pytest.approx(1.0507, abs=1e-12)
    assert selu(np.array(-20.0)) == pytest.approx(-1.7581, abs=1e-3)
    assert SELU_SATURATION == pytest.approx(-SELU_LAMBDA * SELU_ALPHA)


def test_selu_large_inputs_stay_finite():
    out = selu(np.array([-800.0, 800.0]))
    assert np.isfinite(out).all()
    assert out[1] == pytest.approx(SELU_LAMBDA * 800.0)


def test_softplus_is_positive_and_stable():
    out = softplus(np.array([-30.0, 0.0, 800.0]))
    assert (out > 0).all()
    assert out[1] == pytest.approx(np.log(2.0))
    assert out[2] == 800.0


def test_linear_map_gradient():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(3, 1))
    tape = Tape()
    w = tape.parameter(rng.normal(size=(2, 3)))
    grads = tape.backward(reduce_sum(matmul(w, x)))
    assert np.allclose(grads[0], np.outer(np.ones(2), x.ravel()))


def test_squared_selu_gradient():
    tape = Tape()
    w = tape.parameter(np.array(1.0))
    grad, = tape.backward(square(selu(w)))
    assert float(grad) == pytest.approx(2.0 * SELU_LAMBDA ** 2, abs=1e-12)
    assert float(grad) == pytest.approx(2.2079, abs=1e-4)

    numeric = (float(square(selu(np.array(1.0 + STEP)))) -
               float(square(selu(np.array(1.0 - STEP))))) / (2 * STEP)
    assert float(grad) == pytest.approx(numeric, rel=1e-6)


@pytest.mark.parametrize("seed", range(10))
def test_two_layer_network_gradient(seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(5, 3))
    y = rng.normal(size=(5, 1))
    operands = [rng.normal(size=(3, 4)), rng.normal(size=4),
                rng.normal(size=(4, 1)), rng.normal(size=1)]

    def fn(w1, b1, w2, b2):
        hidden = selu(add(matmul(x, w1), b1))
        out = add(matmul(hidden, w2), b2)
        return reduce_mean(square(sub(out, y)))

    analytic = _analytic_gradients(fn, operands)
    for index, grad in enumerate(analytic):
        numeric = _numeric_gradient(fn, operands, index)
        assert _relative_error(grad, numeric) < 1e-6


def test_backward_is_deterministic():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(6, 3))
    w = rng.normal(size=(3, 2))

    def run():
        tape = Tape()
        node = tape.parameter(w)
        return tape.backward(reduce_mean(softplus(matmul(x, node))))[0]

    assert run().tobytes() == run().tobytes()


def test_unused_parameter_gets_zero_gradient():
    tape = Tape()
    used = tape.parameter(np.ones(3))
    unused = tape.parameter(np.ones((2, 2)))
    tape.backward(reduce_sum(used))
    assert np.array_equal(unused.grad, np.zeros((2, 2)))
    assert np.array_equal(used.grad, np.ones(3))


def test_tape_is_topologically_ordered():
    tape = Tape()
    a = tape.parameter(np.ones((2, 2)))
    out = reduce_sum(selu(matmul(a, a)))
    assert out.index == len(tape) - 1
    for node in tape.nodes:
        for parent in node.parents:
            if isinstance(parent, Node):
                assert parent.index < node.index


def test_non_scalar_loss():
    tape = Tape()
    a = tape.parameter(np.ones((2, 2)))
    with raises(ContractError):
        tape.backward(square(a))


def test_loss_from_another_tape():
    first, second = Tape(), Tape()
    loss = reduce_sum(first.parameter(np.ones(2)))
    with raises(ContractError):
        second.backward(loss)
    with raises(ContractError):
        second.backward(np.array(1.0))


def test_operands_on_different_tapes():
    a = Tape().parameter(np.ones(2))
    b = Tape().parameter(np.ones(2))
    with raises(ContractError):
        add(a, b)


def test_untracked_operands_compute_plain_values():
    out = div(np.array([2.0, 9.0]), np.array([4.0, 3.0]))
    assert isinstance(out, np.ndarray)
    assert out.tolist() == [0.5, 3.0]
