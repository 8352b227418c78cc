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
Synthetic regression data with an in-distribution and a shifted partition.

The target is a fixed random smooth function of the inputs (a low-order
polynomial plus a mix of sinusoids) with heteroscedastic Gaussian noise. The
training and dev_in partitions draw inputs from N(0, I); dev_out draws them
from the same law translated by ``shift`` along a random unit direction and
multiplies the noise by ``out_noise_factor``.
"""
from dataclasses import asdict, dataclass, fields
import logging

import numpy as np

from snnuq.abstracts.enums import SplitTag
from snnuq.datastructures import Dataset
from snnuq.errors import ConfigurationError, ContractError

LOGGER = logging.getLogger(__name__)

TARGET_NAME = "target"
SINUSOIDS = 3


@dataclass(frozen=True)
class SyntheticSpec:
    """Sizes and shift of a synthetic benchmark."""

    n_train: int = 5000
    n_in: int = 1000
    n_out: int = 1000
    dims: int = 8
    noise: float = 0.1
    shift: float = 3.0
    out_noise_factor: float = 2.0
    seed: int = 0

    def __post_init__(self):
        for name in ("n_train", "n_in", "n_out", "dims"):
            if getattr(self, name) < 1:
                msg = "SyntheticSpec.{} must be positive, got {}.".format(
                    name, getattr(self, name))
                LOGGER.error(msg)
                raise ContractError(msg)
        if self.noise < 0 or self.shift < 0 or self.out_noise_factor < 0:
            msg = "noise, shift and out_noise_factor must be non-negative."
            LOGGER.error(msg)
            raise ContractError(msg)

    @classmethod
    def from_mapping(cls, mapping):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(mapping) - known)
        if unknown:
            msg = "Unrecognized synthetic keys: {}.".format(
                ", ".join(unknown))
            LOGGER.error(msg)
            raise ConfigurationError(msg)
        return cls(**mapping)

    def as_mapping(self):
        return asdict(self)


class _GroundTruth:
    """Random smooth target function drawn once per seed."""

    def __init__(self, dims, rng):
        scale = 1.0 / np.sqrt(dims)
        self.linear = rng.normal(0.0, scale, dims)
        quadratic = rng.normal(0.0, scale, (dims, dims))
        self.quadratic = 0.25 * (quadratic + quadratic.T) * scale
        self.frequencies = rng.normal(0.0, scale, (SINUSOIDS, dims))
        self.phases = rng.uniform(0.0, 2.0 * np.pi, SINUSOIDS)
        self.amplitudes = rng.uniform(0.5, 1.0, SINUSOIDS)
        direction = rng.normal(size=dims)
        self.noise_direction = direction / np.linalg.norm(direction)

    def mean(self, x):
        poly = x @ self.linear + np.einsum("ij,jk,ik->i", x, self.quadratic, x)
        waves = np.sin(x @ self.frequencies.T + self.phases) @ self.amplitudes
        return poly + waves

    def noise_scale(self, x, noise):
        return noise * (1.0 + 0.5 * np.tanh(x @ self.noise_direction))


def _columns(dims):
    return ["x{}".format(i) for i in range(dims)]


def _draw(truth, rng, rows, dims, offset, noise):
    x = rng.normal(size=(rows, dims)) + offset
    y = truth.mean(x) + truth.noise_scale(x, noise) * rng.normal(size=rows)
    return x, y


def gen_synthetic(spec):
    """
    Generate the train, dev_in and dev_out partitions.

    :param spec: A SyntheticSpec; the same spec always yields the same data.
    :returns: A tuple of three Datasets tagged train, dev_in and dev_out.
    """
    rng = np.random.default_rng(spec.seed)
    truth = _GroundTruth(spec.dims, rng)
    direction = rng.normal(size=spec.dims)
    direction /= np.linalg.norm(direction)
    offset = spec.shift * direction

    zero = np.zeros(spec.dims)
    parts = [
        (SplitTag.TRAIN, spec.n_train, zero, spec.noise),
        (SplitTag.DEV_IN, spec.n_in, zero, spec.noise),
        (SplitTag.DEV_OUT, spec.n_out, offset,
         spec.noise * spec.out_noise_factor),
    ]
    datasets = []
    for tag, rows, shift, noise in parts:
        x, y = _draw(truth, rng, rows, spec.dims, shift, noise)
        datasets.append(Dataset(x, y, tag, _columns(spec.dims), TARGET_NAME))
        LOGGER.debug("Generated %d %s rows.", rows, tag.value)

    return tuple(datasets)
