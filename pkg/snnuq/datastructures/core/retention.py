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
Error-retention curves and the area under them (R-AUC MSE).

Predictions are sorted by uncertainty, lowest first. For every count j of
retained predictions the curve holds the MSE over those j predictions (0 when
nothing is retained); the area under the piecewise-linear curve is the
R-AUC MSE, where lower is better.
"""
from collections import OrderedDict
import logging

import numpy as np
import pandas as pd
import yaml

from snnuq.datastructures.core.ensemble import (
    PredictionBatch,
    predict_arrays,
)
from snnuq.errors import ContractError, ShapeError
from snnuq.numerics import DTYPE
from snnuq.utils import ensure_parent_of

LOGGER = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"
POOLED = "pooled"


class RetentionCurve:
    """Points (retention fraction, MSE) of an error-retention curve."""

    def __init__(self, retention, mse):
        self.retention = np.asarray(retention, dtype=DTYPE).reshape(-1)
        self.mse = np.asarray(mse, dtype=DTYPE).reshape(-1)
        self._check()
        self.retention.setflags(write=False)
        self.mse.setflags(write=False)
        # Uniform 1/N spacing: the trapezoid sum reduces to this form.
        count = len(self.mse) - 1
        self.area = float((self.mse[:-1] + self.mse[1:]).sum() / (2 * count))

    def _check(self):
        retention, mse = self.retention, self.mse
        if len(retention) != len(mse):
            problem = "{} retention values but {} MSE values".format(
                len(retention), len(mse))
        elif len(retention) < 2:
            problem = "fewer than 2 points"
        elif not (np.isfinite(retention).all() and np.isfinite(mse).all()):
            problem = "non-finite values"
        elif retention[0] != 0.0 or retention[-1] != 1.0:
            problem = "retention not running from 0 to 1"
        elif not np.allclose(np.diff(retention), 1.0 / (len(retention) - 1),
                             rtol=1e-9, atol=0.0):
            problem = "retention not uniformly increasing"
        elif mse[0] != 0.0 or (mse < 0.0).any():
            problem = "MSE not starting at 0 or negative"
        else:
            return
        msg = "Invalid retention curve: {}.".format(problem)
        LOGGER.error(msg)
        raise ContractError(msg)

    def __len__(self):
        return len(self.retention)

    @property
    def points(self):
        return list(zip(self.retention.tolist(), self.mse.tolist()))

    @property
    def full_mse(self):
        return float(self.mse[-1])

    def to_frame(self):
        return pd.DataFrame({"retention": self.retention, "mse": self.mse})

    def to_csv(self, path):
        """Write the curve as ``retention,mse`` rows, one per point."""
        ensure_parent_of(path)
        self.to_frame().to_csv(path, index=False,
                               float_format=CSV_FLOAT_FORMAT)

    @classmethod
    def from_csv(cls, path):
        frame = pd.read_csv(path, dtype=DTYPE,
                            float_precision="round_trip")
        missing = {"retention", "mse"} - set(frame.columns)
        if missing:
            msg = "Retention file {} lacks column(s) {}.".format(
                path, ", ".join(sorted(missing)))
            LOGGER.error(msg)
            raise ContractError(msg)
        return cls(frame["retention"].to_numpy(), frame["mse"].to_numpy())


def retention_curve(squared_errors, uncertainty):
    """
    Build the error-retention curve.

    :param squared_errors: Squared error of every prediction.
    :param uncertainty: Uncertainty score of every prediction. Ties keep the
        original order.
    :returns: A RetentionCurve with N + 1 points.
    """
    errors = np.asarray(squared_errors, dtype=DTYPE).reshape(-1)
    scores = np.asarray(uncertainty, dtype=DTYPE).reshape(-1)
    if errors.size == 0:
        msg = "Cannot build a retention curve from zero predictions."
        LOGGER.error(msg)
        raise ContractError(msg)
    if errors.shape != scores.shape:
        msg = "Got {} squared errors but {} uncertainty scores.".format(
            errors.size, scores.size)
        LOGGER.error(msg)
        raise ShapeError(msg)
    if not (np.isfinite(errors).all() and np.isfinite(scores).all()):
        msg = "Squared errors and uncertainties must be finite."
        LOGGER.error(msg)
        raise ContractError(msg)

    count = errors.size
    order = np.argsort(scores, kind="stable")
    retained = np.arange(count + 1)
    totals = np.concatenate([[0.0], np.cumsum(errors[order])])
    mse = np.zeros(count + 1, dtype=DTYPE)
    mse[1:] = totals[1:] / retained[1:]
    return RetentionCurve(retained / count, mse)


def _as_arrays(predictions):
    if isinstance(predictions, PredictionBatch):
        return np.asarray(predictions.mu), np.asarray(predictions.uncertainty)
    mu = np.array([p.mu for p in predictions], dtype=DTYPE)
    uncertainty = np.array([p.uncertainty for p in predictions], dtype=DTYPE)
    return mu, uncertainty


def r_auc_mse(predictions, y):
    """
    R-AUC MSE of predictions against targets.

    :param predictions: A list of GaussianPrediction or a PredictionBatch.
    :param y: Targets aligned with the predictions.
    :returns: The area under the error-retention curve.
    """
    mu, uncertainty = _as_arrays(predictions)
    y = np.asarray(y, dtype=DTYPE).reshape(-1)
    if y.shape != mu.shape:
        msg = "Got {} targets for {} predictions.".format(y.size, mu.size)
        LOGGER.error(msg)
        raise ShapeError(msg)
    return retention_curve((mu - y) ** 2, uncertainty).area


def random_rauc(squared_errors):
    """Expected R-AUC MSE of a uniformly random ordering."""
    errors = np.asarray(squared_errors, dtype=DTYPE)
    return float(errors.mean() * (1.0 - 1.0 / (2 * errors.size)))


class EvaluationReport:
    """Metrics and retention curves of an ensemble on tagged datasets."""

    def __init__(self, members, metrics, curves):
        self.members = members
        self.metrics = metrics
        self.curves = curves

    @property
    def pooled_curve(self):
        return self.curves[POOLED]

    @property
    def splits(self):
        return [name for name in self.metrics if name != POOLED]

    def shift_summary(self):
        """
        Compare shifted splits with in-distribution splits.

        :returns: A dictionary with the pooled mean uncertainty and MSE of
            both groups, or an empty dictionary if one group is missing.
        """
        groups = {"in": [], "out": []}
        for name in self.splits:
            entry = self.metrics[name]
            groups["out" if entry["shifted"] else "in"].append(entry)
        if not groups["in"] or not groups["out"]:
            return {}

        summary = OrderedDict()
        for group, entries in groups.items():
            rows = sum(e["rows"] for e in entries)
            summary["{}_mean_uncertainty".format(group)] = float(
                sum(e["mean_uncertainty"] * e["rows"] for e in entries) / rows)
            summary["{}_mse".format(group)] = float(
                sum(e["mse"] * e["rows"] for e in entries) / rows)
        summary["uncertainty_ratio"] = \
            summary["out_mean_uncertainty"] / summary["in_mean_uncertainty"] \
            if summary["in_mean_uncertainty"] > 0 else float("inf")
        return summary

    def table(self, precision=6):
        """
        Tabulate the metrics, one column per quantity.

        :param precision: Decimal places of the formatted numbers.
        :returns: An ordered mapping of column title to list of cells.
        """
        titles = OrderedDict([
            ("rows", "Rows"), ("mse", "MSE"), ("mae", "MAE"),
            ("rauc_mse", "R-AUC MSE"), ("rauc_mse_random", "Random"),
            ("rauc_mse_oracle", "Oracle"),
            ("rauc_mse_single_member", "Single member"),
            ("mean_uncertainty", "Mean uncertainty"),
        ])
        columns = OrderedDict([("Split", list(self.metrics))])
        for key, title in titles.items():
            cells = []
            for entry in self.metrics.values():
                value = entry[key]
                cells.append(value if isinstance(value, int) else
                             "{:.{}f}".format(value, precision))
            columns[title] = cells
        return columns

    def as_dict(self):
        report = OrderedDict()
        report["members"] = self.members
        report["splits"] = OrderedDict(
            (name, dict(entry)) for name, entry in self.metrics.items())
        shift = self.shift_summary()
        if shift:
            report["shift"] = dict(shift)
        return report

    def to_yaml(self, path):
        """Write the report as a YAML document."""
        ensure_parent_of(path)
        with open(path, "w") as out:
            yaml.safe_dump(_plain(self.as_dict()), out,
                           default_flow_style=False, sort_keys=False)


def _plain(value):
    """Convert ordered dicts and numpy scalars to YAML friendly types."""
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def _split_metrics(batch, single, y, shifted):
    errors = (batch.mu - y) ** 2
    curve = retention_curve(errors, batch.uncertainty)
    entry = OrderedDict()
    entry["rows"] = int(len(y))
    entry["shifted"] = bool(shifted)
    entry["mse"] = float(errors.mean())
    entry["mae"] = float(np.abs(batch.mu - y).mean())
    entry["rauc_mse"] = curve.area
    entry["rauc_mse_random"] = random_rauc(errors)
    entry["rauc_mse_oracle"] = retention_curve(errors, errors).area
    entry["rauc_mse_single_member"] = retention_curve(
        (single.mu - y) ** 2, single.uncertainty).area
    entry["mean_uncertainty"] = float(batch.uncertainty.mean())
    entry["mean_aleatoric"] = float(batch.aleatoric.mean())
    entry["mean_epistemic"] = float(batch.epistemic.mean())
    return entry, curve


def _concat(batches):
    return PredictionBatch(*[np.concatenate(parts)
                             for parts in zip(*batches)])


def evaluate_splits(ens, datasets):
    """
    Evaluate an ensemble on tagged datasets.

    :param ens: A fitted EnsembleModel.
    :param datasets: Datasets with targets; their split tags name the
        report entries and mark shifted partitions.
    :returns: An EvaluationReport with one entry per split plus the pooled
        entry over all of them.
    """
    if not datasets:
        msg = "evaluate_splits needs at least one dataset."
        LOGGER.error(msg)
        raise ContractError(msg)

    single = ens.select([0]) if len(ens) > 1 else ens
    metrics, curves = OrderedDict(), OrderedDict()
    batches, singles, targets = [], [], []
    for dataset in datasets:
        name = dataset.split_tag.value
        if not dataset.has_target:
            msg = "Dataset '{}' has no target; it cannot be evaluated." \
                  .format(name)
            LOGGER.error(msg)
            raise ContractError(msg)
        if name in metrics:
            msg = "Split '{}' was given more than once.".format(name)
            LOGGER.error(msg)
            raise ContractError(msg)

        batch = predict_arrays(ens, dataset.features)
        alone = predict_arrays(single, dataset.features)
        y = np.asarray(dataset.target, dtype=DTYPE)
        metrics[name], curves[name] = _split_metrics(
            batch, alone, y, dataset.split_tag.is_shifted)
        LOGGER.info("Split %s: %d rows, MSE %.6f, R-AUC MSE %.6f.", name,
                    len(y), metrics[name]["mse"], metrics[name]["rauc_mse"])
        batches.append(batch)
        singles.append(alone)
        targets.append(y)

    pooled, pooled_curve = _split_metrics(
        _concat(batches), _concat(singles), np.concatenate(targets),
        any(d.split_tag.is_shifted for d in datasets))
    metrics[POOLED], curves[POOLED] = pooled, pooled_curve
    return EvaluationReport(len(ens), metrics, curves)
