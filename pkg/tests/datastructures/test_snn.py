import numpy as np
import pytest
from pytest import raises

from snnuq.abstracts.enums import AuxKind
from snnuq.datastructures.core import (
    SIGMA_FLOOR,
    MultitaskLoss,
    SnnModel,
    SnnSpec,
    alpha_dropout,
    combined_loss,
    forward,
    gaussian_nll,
    lecun_init,
    trace_activations,
)
from snnuq.errors import ContractError, ShapeError
from snnuq.numerics import SELU_SATURATION, Tape, value_of


def _small_spec(**overrides):
    values = dict(input_dim=3, hidden_dim=8, trunk_layers=2, upper_layers=2,
                  projection_dim=4, alpha_dropout_rate=0.0, seed=1)
    values.update(overrides)
    return SnnSpec(**values)


def test_default_spec():
    spec = SnnSpec(input_dim=123)
    assert spec.hidden_dim == 512
    assert spec.trunk_layers == 12
    assert spec.upper_layers == 6
    assert spec.projection_dim == 128
    assert spec.alpha_dropout_rate == 0.0003
    assert spec.layer_count == 20
    assert len(spec.layer_shapes()) == spec.layer_count


def test_layer_shapes_order():
    shapes = _small_spec().layer_shapes()
    assert shapes == [(3, 8), (8, 8), (8, 8), (8, 8), (8, 2), (8, 4)]


@pytest.mark.parametrize(
    "overrides",
    [
        {"input_dim": 0},
        {"hidden_dim": 0},
        {"trunk_layers": 0},
        {"projection_dim": 0},
        {"alpha_dropout_rate": 1.0},
        {"alpha_dropout_rate": -0.1},
    ],
)
def test_invalid_spec(overrides):
    with raises(ContractError):
        _small_spec(**overrides)


def test_lecun_variance():
    spec = SnnSpec(input_dim=4, hidden_dim=512, trunk_layers=2,
                   upper_layers=1, projection_dim=8)
    model = lecun_init(spec, seed=0)
    weights = model.weights[1]
    assert weights.shape == (512, 512)
    assert weights.var() == pytest.approx(1.0 / 512, rel=0.1)
    assert all(not b.any() for b in model.biases)


def test_lecun_unit_fan_in():
    spec = SnnSpec(input_dim=1, hidden_dim=1000, trunk_layers=1,
                   upper_layers=1, projection_dim=2)
    model = lecun_init(spec, seed=4)
    assert model.weights[0].std() == pytest.approx(1.0, rel=0.1)


def test_lecun_is_deterministic():
    spec = _small_spec()
    first, second = lecun_init(spec, 9), lecun_init(spec, 9)
    for a, b in zip(first.parameters(), second.parameters()):
        assert a.tobytes() == b.tobytes()
    other = lecun_init(spec, 10)
    assert not np.array_equal(first.weights[0], other.weights[0])


def test_model_rejects_wrong_shapes():
    spec = _small_spec()
    model = lecun_init(spec)
    weights = list(model.weights)
    weights[1] = np.zeros((8, 7))
    with raises(ShapeError):
        SnnModel(spec, weights, model.biases)
    with raises(ShapeError):
        SnnModel(spec, model.weights[:-1], model.biases[:-1])


def test_model_views_and_copy():
    model = lecun_init(_small_spec())
    assert len(model.trunk) == 2
    assert len(model.upper) == 2
    assert model.output_head[0].shape == (8, 2)
    assert model.projection_head[0].shape == (8, 4)
    assert model.parameter_count() == sum(
        n_in * n_out + n_out for n_in, n_out in model.spec.layer_shapes())

    clone = model.copy()
    clone.weights[0][0, 0] += 1.0
    assert clone.weights[0][0, 0] != model.weights[0][0, 0]


def test_alpha_dropout_identities():
    x = np.random.default_rng(0).normal(size=(4, 5))
    assert alpha_dropout(x, 0.0, True, np.random.default_rng(1)) is x
    assert alpha_dropout(x, 0.5, False) is x
    with raises(ContractError):
        alpha_dropout(x, 0.5, True)
    with raises(ContractError):
        alpha_dropout(x, 1.0, True, np.random.default_rng(1))


def test_alpha_dropout_keeps_moments():
    x = np.random.default_rng(2).normal(size=(1000, 1000))
    out = alpha_dropout(x, 0.1, True, np.random.default_rng(3))
    assert abs(out.mean()) < 0.01
    assert out.var() == pytest.approx(1.0, abs=0.02)


def test_alpha_dropout_dropped_units():
    rate = 0.3
    q = 1.0 - rate
    a = (q + SELU_SATURATION ** 2 * rate * q) ** -0.5
    b = -a * rate * SELU_SATURATION
    x = np.random.default_rng(4).normal(size=(200, 50))
    out = alpha_dropout(x, rate, True, np.random.default_rng(5))

    dropped = out == a * SELU_SATURATION + b
    assert dropped.mean() == pytest.approx(rate, abs=0.03)
    assert np.allclose(out[~dropped], a * x[~dropped] + b, atol=1e-12)


def test_zero_network():
    spec = _small_spec()
    model = SnnModel(spec, [np.zeros(s) for s in spec.layer_shapes()],
                     [np.zeros(s[1]) for s in spec.layer_shapes()])
    out = forward(model, np.ones((3, 3)))
    assert np.array_equal(out.mu_std, np.zeros(3))
    assert np.allclose(out.sigma_std, np.log(2.0) + SIGMA_FLOOR, atol=1e-15)


def test_forward_shapes_and_projection_norm():
    model = lecun_init(_small_spec())
    x = np.random.default_rng(6).normal(size=(10, 3))
    out = forward(model, x)
    assert out.mu_std.shape == (10,)
    assert out.sigma_std.shape == (10,)
    assert out.projection.shape == (10, 4)
    assert out.trunk_out.shape == (10, 8)
    assert (out.sigma_std > 0).all()
    assert np.allclose(np.linalg.norm(out.projection, axis=1), 1.0,
                       atol=1e-10)


def test_unnormalized_projection_head():
    model = lecun_init(_small_spec(normalize_projection=False))
    x = np.random.default_rng(6).normal(size=(10, 3))
    norms = np.linalg.norm(forward(model, x).projection, axis=1)
    assert not np.allclose(norms, 1.0)


def test_forward_input_mismatch():
    model = lecun_init(_small_spec())
    with raises(ShapeError):
        forward(model, np.ones((2, 4)))
    with raises(ShapeError):
        forward(model, np.ones(3))


def test_forward_is_row_independent():
    model = lecun_init(_small_spec())
    x = np.random.default_rng(7).normal(size=(12, 3))
    full = forward(model, x)
    first = forward(model, x[:5])
    rest = forward(model, x[5:])
    again = forward(model, x)

    assert full.mu_std.tobytes() == again.mu_std.tobytes()
    assert np.allclose(np.concatenate([first.mu_std, rest.mu_std]),
                       full.mu_std, rtol=0, atol=1e-12)
    assert np.allclose(np.concatenate([first.sigma_std, rest.sigma_std]),
                       full.sigma_std, rtol=0, atol=1e-12)


def test_sigma_is_floored():
    spec = _small_spec()
    shapes = spec.layer_shapes()
    biases = [np.zeros(n_out) for _, n_out in shapes]
    biases[-2] = np.array([0.0, -800.0])
    model = SnnModel(spec, [np.zeros(s) for s in shapes], biases)
    out = forward(model, np.ones((4, 3)))
    assert out.sigma_std.tolist() == [SIGMA_FLOOR] * 4
    assert np.isfinite(gaussian_nll(out.mu_std, out.sigma_std, np.ones(4)))


def test_sigma_positive_for_large_inputs():
    model = lecun_init(_small_spec(), seed=3)
    x = 10.0 * np.random.default_rng(8).normal(size=(50, 3))
    assert (forward(model, x).sigma_std > 0).all()


def test_training_forward_uses_dropout():
    model = lecun_init(_small_spec(alpha_dropout_rate=0.2))
    x = np.random.default_rng(9).normal(size=(20, 3))
    plain = forward(model, x)
    noisy = forward(model, x, training=True, rng=np.random.default_rng(0))
    assert not np.array_equal(plain.mu_std, noisy.mu_std)


@pytest.mark.parametrize("seed", range(10))
def test_self_normalization(seed):
    rng = np.random.default_rng(seed)
    model = lecun_init(SnnSpec(input_dim=512), seed=seed)
    x = rng.normal(size=(500, 512))
    activations = trace_activations(model, x)
    assert len(activations) == 18
    for layer, h in enumerate(activations):
        assert abs(h.mean()) < 0.1, layer
        assert 0.8 <= h.var() <= 1.25, layer


def _relative_error(analytic, numeric, floor=1e-3):
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / scale))


@pytest.mark.parametrize("aux_kind", [AuxKind.CONTRASTIVE,
                                      AuxKind.CROSSENTROPY])
def test_full_model_gradient(aux_kind):
    rng = np.random.default_rng(12)
    crossentropy = aux_kind is AuxKind.CROSSENTROPY
    spec = _small_spec(normalize_projection=not crossentropy)
    model = lecun_init(spec, seed=5)
    x = rng.normal(size=(6, 3))
    y = rng.normal(size=6)
    classes = np.array([0, 1, 2, 0, 1, 2])
    cfg = MultitaskLoss(aux_kind=aux_kind)

    tape = Tape()
    loss = combined_loss(cfg, forward(model, x, tape=tape), y, classes)
    analytic = tape.backward(loss)

    def value():
        return float(value_of(combined_loss(cfg, forward(model, x), y,
                                            classes)))

    step = 1e-6
    for param, grad in zip(model.parameters(), analytic):
        numeric = np.zeros_like(param)
        for position in np.ndindex(param.shape):
            original = param[position]
            param[position] = original + step
            upper = value()
            param[position] = original - step
            lower = value()
            param[position] = original
            numeric[position] = (upper - lower) / (2 * step)
        assert _relative_error(grad, numeric) < 1e-4
