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
One-dimensional extrapolation demo.

A nonlinear ground truth is sampled on [-1, 1] for training and initial
testing, and beyond that interval for new data. A closed-form linear
regression and a small self-normalizing network are fitted on the known data
and both are scored inside and outside the training range.
"""
from collections import OrderedDict
from dataclasses import dataclass
import logging

import numpy as np
import yaml

from snnuq.datastructures.core import (
    MultitaskLoss,
    OptimizerConfig,
    PreprocessConfig,
    TrainConfig,
    predict_arrays,
    train_ensemble,
)
from snnuq.errors import ContractError
from snnuq.utils import ensure_parent_of

LOGGER = logging.getLogger(__name__)

GROUND_TRUTHS = {
    "cubic": lambda x: 4.0 * x ** 3 - 3.0 * x,
    "linear": lambda x: 1.5 * x - 0.5,
}


@dataclass(frozen=True)
class ExtrapolationSpec:
    """Sampling and model sizes of the demo."""

    seed: int = 0
    ground_truth: str = "cubic"
    n_train: int = 200
    n_test: int = 100
    n_new: int = 100
    noise: float = 0.1
    new_low: float = 1.0
    new_high: float = 1.5

    def __post_init__(self):
        if self.ground_truth not in GROUND_TRUTHS:
            msg = "Unknown ground truth '{}'. Expected one of {}.".format(
                self.ground_truth, ", ".join(sorted(GROUND_TRUTHS)))
            LOGGER.error(msg)
            raise ContractError(msg)
        if not 1.0 <= self.new_low < self.new_high:
            raise ContractError("New data must lie beyond the unit range.")

    def network_config(self):
        """Training settings of the single small network."""
        return TrainConfig(
            ensemble_size=1, batch_size=50, max_epochs=300, patience=30,
            validation_fraction=0.1, class_count=4, seed=self.seed,
            hidden_dim=32, trunk_layers=2, upper_layers=1, projection_dim=8,
            alpha_dropout_rate=0.0,
            loss=MultitaskLoss(aux_weight=0.0, aux_kind="none"),
            optimizer=OptimizerConfig(learning_rate=0.003, clip_norm=1.0),
            preprocess=PreprocessConfig(quantize=False, decorrelate=False))


class ExtrapolationResult:
    """Samples, fitted curves and scores of one demo run."""

    def __init__(self, spec, known, test, new, grid, fits):
        self.spec = spec
        self.ground_truth = spec.ground_truth
        self.x_known, self.y_known = known
        self.x_test, self.y_test = test
        self.x_new, self.y_new = new
        self.grid = grid
        self.truth = GROUND_TRUTHS[spec.ground_truth](grid)
        self.linear = fits["linear"]["grid"]
        self.snn = fits["snn"]["grid"]
        self.scores = OrderedDict(
            (name, OrderedDict([("in_mse", fit["in_mse"]),
                                ("out_mse", fit["out_mse"])]))
            for name, fit in fits.items())

    def as_dict(self):
        report = OrderedDict()
        report["ground_truth"] = self.ground_truth
        report["seed"] = self.spec.seed
        report["noise"] = self.spec.noise
        for name, scores in self.scores.items():
            report[name] = dict(scores)
        return dict(report)

    def to_yaml(self, path):
        ensure_parent_of(path)
        with open(path, "w") as out:
            yaml.safe_dump(self.as_dict(), out, default_flow_style=False,
                           sort_keys=False)


def fit_linear(x, y):
    """Least-squares line through (x, y); returns (slope, intercept)."""
    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(slope), float(intercept)


def _sample(rng, spec, truth):
    known_x = rng.uniform(-1.0, 1.0, spec.n_train)
    test_x = rng.uniform(-1.0, 1.0, spec.n_test)
    signs = np.where(rng.random(spec.n_new) < 0.5, -1.0, 1.0)
    new_x = signs * rng.uniform(spec.new_low, spec.new_high, spec.n_new)

    def noisy(x):
        return truth(x) + spec.noise * rng.normal(size=x.shape)

    return ((known_x, noisy(known_x)), (test_x, noisy(test_x)),
            (new_x, noisy(new_x)))


def _mse(prediction, target):
    return float(np.mean((prediction - target) ** 2))


def demo_extrapolation(seed=0, ground_truth="cubic", spec=None):
    """
    Run the extrapolation demo.

    :param seed: Seed of the sampling and of the network.
    :param ground_truth: ``cubic`` or ``linear``.
    :param spec: Full ExtrapolationSpec; overrides seed and ground_truth.
    :returns: An ExtrapolationResult.
    """
    spec = spec or ExtrapolationSpec(seed=seed, ground_truth=ground_truth)
    truth = GROUND_TRUTHS[spec.ground_truth]
    rng = np.random.default_rng(spec.seed)
    known, test, new = _sample(rng, spec, truth)
    grid = np.linspace(-spec.new_high, spec.new_high, 241)

    slope, intercept = fit_linear(*known)
    ensemble = train_ensemble(known[0].reshape(-1, 1), known[1],
                              spec.network_config(), ["x"])

    def network(x):
        return predict_arrays(ensemble, x.reshape(-1, 1)).mu

    fits = OrderedDict()
    for name, model in (("linear", lambda x: slope * x + intercept),
                        ("snn", network)):
        fits[name] = {"in_mse": _mse(model(test[0]), test[1]),
                      "out_mse": _mse(model(new[0]), new[1]),
                      "grid": model(grid)}
        LOGGER.info("%s: in-distribution MSE %.6f, new data MSE %.6f", name,
                    fits[name]["in_mse"], fits[name]["out_mse"])

    return ExtrapolationResult(spec, known, test, new, grid, fits)
