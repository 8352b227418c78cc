###############################################################################
# Copyright (c) 2021, the snnuq developers.
#
# This file is part of snnuq, Version: 0.3.0.
#
# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:
# The above copyright notice and this permission notice shall be included in
# all copies or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.
###############################################################################
"""
Self-normalizing feed-forward network with a hierarchical two-head topology.

Layout of one network::

    x -> [trunk: trunk_layers x (dense, SELU, alpha dropout)] -> trunk_out
    trunk_out -> dense -> projection head (low-level task)
    trunk_out -> [upper: upper_layers x (dense, SELU, alpha dropout)]
              -> dense(2) -> (mu~, sigma~) ; sigma = softplus(sigma~) + floor

Parameters are stored layer by layer in that order (trunk, upper, output
head, projection head), each layer as a weight matrix (n_in x n_out) and a
bias vector.
"""
from collections import namedtuple
from dataclasses import dataclass
import logging

import numpy as np

from snnuq.errors import ContractError, ShapeError
from snnuq.numerics import (
    DTYPE,
    SELU_SATURATION,
    add,
    column,
    matmul,
    mul,
    row_normalize,
    selu,
    softplus,
    value_of,
)

LOGGER = logging.getLogger(__name__)

# Lower bound on the predicted standard deviation (standardized units).
SIGMA_FLOOR = 1e-6

ForwardResult = namedtuple(
    "ForwardResult", ["mu_std", "sigma_std", "projection", "trunk_out"])


@dataclass(frozen=True)
class SnnSpec:
    """Dimensions and regularization of one network."""

    input_dim: int
    hidden_dim: int = 512
    trunk_layers: int = 12
    upper_layers: int = 6
    projection_dim: int = 128
    alpha_dropout_rate: float = 0.0003
    normalize_projection: bool = True
    seed: int = 0

    def __post_init__(self):
        for name in ("input_dim", "hidden_dim", "trunk_layers",
                     "upper_layers", "projection_dim"):
            if getattr(self, name) < 1:
                msg = "SnnSpec.{} must be at least 1, got {}.".format(
                    name, getattr(self, name))
                LOGGER.error(msg)
                raise ContractError(msg)
        if not 0.0 <= self.alpha_dropout_rate < 1.0:
            msg = "Alpha dropout rate must lie in [0, 1), got {}.".format(
                self.alpha_dropout_rate)
            LOGGER.error(msg)
            raise ContractError(msg)

    @property
    def layer_count(self):
        """Hidden layers plus the two heads."""
        return self.trunk_layers + self.upper_layers + 2

    def layer_shapes(self):
        """
        List (n_in, n_out) for every layer in storage order.

        :returns: A list of tuples: trunk layers, upper layers, output head,
            projection head.
        """
        shapes = [(self.input_dim, self.hidden_dim)]
        shapes += [(self.hidden_dim, self.hidden_dim)] * (
            self.trunk_layers - 1 + self.upper_layers)
        shapes.append((self.hidden_dim, 2))
        shapes.append((self.hidden_dim, self.projection_dim))
        return shapes


class SnnModel:
    """Weights of one self-normalizing network."""

    def __init__(self, spec, weights, biases):
        """
        Create a model from explicit parameters.

        :param spec: The SnnSpec the parameters follow.
        :param weights: List of weight matrices in storage order.
        :param biases: List of bias vectors in storage order.
        """
        shapes = spec.layer_shapes()
        if len(weights) != len(shapes) or len(biases) != len(shapes):
            msg = "Expected {} layers, got {} weights and {} biases.".format(
                len(shapes), len(weights), len(biases))
            LOGGER.error(msg)
            raise ShapeError(msg)

        for index, (shape, weight, bias) in enumerate(
                zip(shapes, weights, biases)):
            if np.shape(weight) != shape or np.shape(bias) != (shape[1],):
                msg = "Layer {} expects weight {} and bias ({},), got {} " \
                      "and {}.".format(index, shape, shape[1],
                                       np.shape(weight), np.shape(bias))
                LOGGER.error(msg)
                raise ShapeError(msg)

        self.spec = spec
        self.weights = [np.array(w, dtype=DTYPE) for w in weights]
        self.biases = [np.array(b, dtype=DTYPE) for b in biases]

    @property
    def trunk(self):
        count = self.spec.trunk_layers
        return list(zip(self.weights[:count], self.biases[:count]))

    @property
    def upper(self):
        start = self.spec.trunk_layers
        stop = start + self.spec.upper_layers
        return list(zip(self.weights[start:stop], self.biases[start:stop]))

    @property
    def output_head(self):
        return self.weights[-2], self.biases[-2]

    @property
    def projection_head(self):
        return self.weights[-1], self.biases[-1]

    def parameters(self):
        """
        Return the parameter arrays, interleaved weight/bias per layer.

        The arrays are the live storage of the model; optimizers update them
        in place.
        """
        params = []
        for weight, bias in zip(self.weights, self.biases):
            params.append(weight)
            params.append(bias)
        return params

    def copy(self):
        """Return a deep copy of the model."""
        return SnnModel(self.spec, [w.copy() for w in self.weights],
                        [b.copy() for b in self.biases])

    def load_parameters(self, values):
        """
        Overwrite every parameter in place.

        :param values: Arrays in ``parameters()`` order.
        """
        for target, value in zip(self.parameters(), values):
            target[...] = value

    def parameter_count(self):
        return sum(p.size for p in self.parameters())


def lecun_init(spec, seed=None):
    """
    Create a model with Lecun-normal weights and zero biases.

    Each weight is drawn from N(0, 1/n_in); draws happen layer by layer in
    storage order from one generator, so a seed fully determines the model.

    :param spec: A SnnSpec.
    :param seed: Seed overriding ``spec.seed``.
    :returns: A new SnnModel.
    """
    rng = np.random.default_rng(spec.seed if seed is None else seed)
    weights, biases = [], []
    for n_in, n_out in spec.layer_shapes():
        weights.append(rng.normal(0.0, np.sqrt(1.0 / n_in), (n_in, n_out)))
        biases.append(np.zeros(n_out, dtype=DTYPE))
    return SnnModel(spec, weights, biases)


def alpha_dropout(x, rate, training, rng=None):
    """
    Alpha dropout: set units to the SELU saturation value and correct the
    result affinely so that zero mean and unit variance are kept.

    With keep mask d ~ Bernoulli(1 - rate), q = 1 - rate and saturation
    value s, the output is a * (x * d + s * (1 - d)) + b with
    a = (q + s^2 * rate * q) ^ (-1/2) and b = -a * rate * s.

    :param x: Activations (array or Node).
    :param rate: Drop probability in [0, 1).
    :param training: Apply the noise only when True.
    :param rng: A numpy Generator, required in training mode.
    """
    if not 0.0 <= rate < 1.0:
        raise ContractError("Dropout rate must lie in [0, 1).")
    if not training or rate == 0.0:
        return x
    if rng is None:
        raise ContractError("Alpha dropout in training mode needs an rng.")

    q = 1.0 - rate
    a = (q + SELU_SATURATION ** 2 * rate * q) ** -0.5
    b = -a * rate * SELU_SATURATION
    keep = (rng.random(value_of(x).shape) >= rate).astype(DTYPE)
    return add(mul(x, a * keep), a * SELU_SATURATION * (1.0 - keep) + b)


def _dense_selu(h, weight, bias, rate, training, rng):
    h = selu(add(matmul(h, weight), bias))
    return alpha_dropout(h, rate, training, rng)


def forward(model, x, training=False, rng=None, tape=None):
    """
    Run one network on a batch.

    :param model: An SnnModel.
    :param x: Input matrix with ``model.spec.input_dim`` columns.
    :param training: Enable alpha dropout.
    :param rng: Generator for the dropout masks (training mode).
    :param tape: Record the computation on this Tape; the model parameters
        are registered as tape parameters in ``model.parameters()`` order.
    :returns: ForwardResult(mu_std, sigma_std, projection, trunk_out).
    """
    spec = model.spec
    xv = value_of(x)
    if xv.ndim != 2 or xv.shape[1] != spec.input_dim:
        msg = "Model expects {} input columns, got shape {}.".format(
            spec.input_dim, xv.shape)
        LOGGER.error(msg)
        raise ShapeError(msg)

    params = model.parameters()
    if tape is not None:
        params = [tape.parameter(p) for p in params]
    layers = list(zip(params[0::2], params[1::2]))
    rate = spec.alpha_dropout_rate

    h = x
    for weight, bias in layers[:spec.trunk_layers]:
        h = _dense_selu(h, weight, bias, rate, training, rng)
    trunk_out = h

    weight, bias = layers[-1]
    projection = add(matmul(trunk_out, weight), bias)
    if spec.normalize_projection:
        projection = row_normalize(projection)

    for weight, bias in layers[spec.trunk_layers:-2]:
        h = _dense_selu(h, weight, bias, rate, training, rng)

    weight, bias = layers[-2]
    head = add(matmul(h, weight), bias)
    mu_std = column(head, 0)
    sigma_std = add(softplus(column(head, 1)), SIGMA_FLOOR)

    return ForwardResult(mu_std, sigma_std, projection, trunk_out)


def trace_activations(model, x):
    """
    Collect the post-SELU activation of every hidden layer (inference mode).

    :param model: An SnnModel.
    :param x: Input matrix.
    :returns: A list of ``trunk_layers + upper_layers`` activation matrices.
    """
    activations = []
    h = np.asarray(x, dtype=DTYPE)
    for weight, bias in model.trunk + model.upper:
        h = selu(h @ weight + bias)
        activations.append(h)
    return activations
