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
Deep ensembles of self-normalizing networks.

Every member is trained on its own stratified train/validation split of the
shared training pool, with its own seed for initialization, shuffling and
dropout noise. Predictions of the members are combined as a uniform mixture
of Gaussians whose total variance is the uncertainty score.
"""
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
import logging
import math

import numpy as np

from snnuq.abstracts.enums import AuxKind, MemberStatus
from snnuq.datastructures.core.losses import (
    MultitaskLoss,
    combined_loss,
    gaussian_nll,
)
from snnuq.datastructures.core.optimizer import (
    OptimizerConfig,
    OptimizerState,
    optimizer_step,
)
from snnuq.datastructures.core.pipeline import (
    PreprocessConfig,
    coarse_classes,
    fit_pipeline,
    inverse_target,
    transform_features,
    transform_target,
)
from snnuq.datastructures.core.snn import SnnSpec, forward, lecun_init
from snnuq.errors import (
    ConfigurationError,
    ContractError,
    MemberDivergedError,
    ShapeError,
    TrainingError,
)
from snnuq.numerics import Tape, as_matrix, as_vector, value_of
from snnuq.utils import derive_seeds

LOGGER = logging.getLogger(__name__)

GaussianPrediction = namedtuple("GaussianPrediction",
                                ["mu", "sigma", "uncertainty"])
PredictionBatch = namedtuple(
    "PredictionBatch",
    ["mu", "sigma", "uncertainty", "aleatoric", "epistemic"])

# Flat configuration keys of the nested settings.
_LOSS_KEYS = {"nll_weight": "nll_weight", "aux_weight": "aux_weight",
              "aux_kind": "aux_kind", "contrastive_temperature": "temperature"}
_OPTIMIZER_KEYS = ("learning_rate", "beta1", "beta2", "epsilon",
                   "sync_period", "slow_step", "clip_norm")
_PREPROCESS_KEYS = ("fill_value", "quantize", "decorrelate", "min_bins",
                    "max_bins", "pca_tolerance")


@dataclass(frozen=True)
class TrainConfig:
    """Settings of one ensemble training run."""

    ensemble_size: int = 20
    batch_size: int = 512
    max_epochs: int = 100
    patience: int = 10
    validation_fraction: float = 0.1
    class_count: int = 10
    seed: int = 0
    workers: int = 1
    max_abort_fraction: float = 0.25
    hidden_dim: int = 512
    trunk_layers: int = 12
    upper_layers: int = 6
    projection_dim: int = 128
    alpha_dropout_rate: float = 0.0003
    exclude_columns: tuple = ()
    loss: MultitaskLoss = field(default_factory=MultitaskLoss)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)

    def __post_init__(self):
        object.__setattr__(self, "exclude_columns",
                           tuple(self.exclude_columns))
        problems = []
        for name in ("ensemble_size", "batch_size", "max_epochs", "patience",
                     "workers"):
            if getattr(self, name) < 1:
                problems.append("{} must be at least 1".format(name))
        if not 0.0 < self.validation_fraction < 1.0:
            problems.append("validation_fraction must lie in (0, 1)")
        if self.class_count < 2:
            problems.append("class_count must be at least 2")
        if not 0.0 <= self.max_abort_fraction <= 1.0:
            problems.append("max_abort_fraction must lie in [0, 1]")
        columns = self.exclude_columns
        if not all(isinstance(c, str) and c for c in columns):
            problems.append("exclude_columns must hold non-empty names")
        elif len(set(columns)) != len(columns):
            problems.append("exclude_columns must not repeat a name")

        if problems:
            msg = "Invalid training configuration: {}.".format(
                "; ".join(problems))
            LOGGER.error(msg)
            raise ContractError(msg)

    @classmethod
    def from_mapping(cls, mapping):
        """
        Build a TrainConfig from flat configuration keys.

        :param mapping: Dictionary using the keys of the TRAIN configuration
            section; missing keys take their defaults.
        :returns: A TrainConfig.
        """
        mapping = dict(mapping)
        loss = {_LOSS_KEYS[key]: mapping.pop(key)
                for key in list(mapping) if key in _LOSS_KEYS}
        optimizer = {key: mapping.pop(key)
                     for key in list(mapping) if key in _OPTIMIZER_KEYS}
        preprocess = {key: mapping.pop(key)
                      for key in list(mapping) if key in _PREPROCESS_KEYS}

        known = {f.name for f in fields(cls)} - {"loss", "optimizer",
                                                  "preprocess"}
        unknown = sorted(set(mapping) - known)
        if unknown:
            msg = "Unrecognized training keys: {}.".format(", ".join(unknown))
            LOGGER.error(msg)
            raise ConfigurationError(msg)

        return cls(loss=MultitaskLoss(**loss),
                   optimizer=OptimizerConfig(**optimizer),
                   preprocess=PreprocessConfig(**preprocess), **mapping)

    def as_mapping(self):
        """Flatten the configuration into TRAIN section keys."""
        flat = {f.name: getattr(self, f.name) for f in fields(self)
                if f.name not in ("loss", "optimizer", "preprocess")}
        flat["exclude_columns"] = list(self.exclude_columns)
        for key, attr in _LOSS_KEYS.items():
            flat[key] = getattr(self.loss, attr)
        flat["aux_kind"] = self.loss.aux_kind.value
        flat.update(asdict(self.optimizer))
        flat.update(asdict(self.preprocess))
        return flat

    def snn_spec(self, input_dim, seed=0):
        """
        Network dimensions for one member.

        A crossentropy low-level task needs one unnormalized logit per coarse
        class; the contrastive task uses a normalized projection.
        """
        crossentropy = self.loss.aux_kind is AuxKind.CROSSENTROPY
        return SnnSpec(
            input_dim=input_dim, hidden_dim=self.hidden_dim,
            trunk_layers=self.trunk_layers, upper_layers=self.upper_layers,
            projection_dim=(self.class_count if crossentropy
                            else self.projection_dim),
            alpha_dropout_rate=self.alpha_dropout_rate,
            normalize_projection=not crossentropy, seed=seed)


@dataclass
class MemberHistory:
    """Training record of one member."""

    member: int
    seed: int
    validation_nll: list
    best_epoch: int = 0
    status: MemberStatus = MemberStatus.MAX_EPOCHS
    train_rows: int = 0
    validation_rows: int = 0

    @property
    def epochs_run(self):
        return len(self.validation_nll) - 1

    @property
    def best_nll(self):
        return self.validation_nll[self.best_epoch]


class EnsembleModel:
    """Trained members sharing one preprocessing pipeline."""

    def __init__(self, members, pipeline, member_seeds, config=None,
                 feature_columns=None, histories=None, target_name=None):
        """
        Assemble an ensemble.

        :param members: List of SnnModel, at least one.
        :param pipeline: The FittedPipeline every member consumes.
        :param member_seeds: Seed of every member, aligned with members.
        :param config: The TrainConfig used for training (optional).
        :param feature_columns: Raw feature column names (optional).
        :param histories: MemberHistory per member (optional).
        :param target_name: Name of the target column (optional).
        """
        if not members:
            msg = "An ensemble needs at least one member."
            LOGGER.error(msg)
            raise ContractError(msg)
        if len(member_seeds) != len(members):
            msg = "Got {} seeds for {} members.".format(len(member_seeds),
                                                        len(members))
            LOGGER.error(msg)
            raise ShapeError(msg)
        for member in members:
            if member.spec.input_dim != pipeline.output_dim:
                msg = "Member input dimension {} does not match the " \
                      "pipeline output dimension {}.".format(
                          member.spec.input_dim, pipeline.output_dim)
                LOGGER.error(msg)
                raise ShapeError(msg)

        self.members = list(members)
        self.pipeline = pipeline
        self.member_seeds = [int(s) for s in member_seeds]
        self.config = config if config is not None else TrainConfig()
        self.feature_columns = list(feature_columns or [])
        self.histories = list(histories or [])
        self.target_name = target_name

    def __len__(self):
        return len(self.members)

    @property
    def input_columns(self):
        return self.pipeline.input_columns

    def select(self, indices):
        """Return an ensemble restricted to the given member indices."""
        return EnsembleModel([self.members[i] for i in indices],
                             self.pipeline,
                             [self.member_seeds[i] for i in indices],
                             self.config, self.feature_columns,
                             target_name=self.target_name)


def stratified_split(y_classes, fraction, seed):
    """
    Split row indices into train and validation parts per class.

    Each class c with n_c rows sends ``ceil(fraction * n_c)`` rows to
    validation, but always keeps at least one row in train.

    :param y_classes: Class id of every row.
    :param fraction: Validation fraction in (0, 1).
    :param seed: Seed of the shuffle.
    :returns: Sorted index arrays ``(train, validation)``.
    """
    if not 0.0 < fraction < 1.0:
        msg = "Validation fraction must lie in (0, 1), got {}.".format(
            fraction)
        LOGGER.error(msg)
        raise ContractError(msg)

    labels = np.asarray(y_classes).reshape(-1)
    rng = np.random.default_rng(seed)
    train, validation = [], []
    for label in np.unique(labels):
        rows = rng.permutation(np.flatnonzero(labels == label))
        # Guard against fraction * n landing a hair above an integer.
        n_val = min(math.ceil(fraction * len(rows) - 1e-9), len(rows) - 1)
        validation.append(rows[:n_val])
        train.append(rows[n_val:])

    if not train:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    return (np.sort(np.concatenate(train)).astype(np.int64),
            np.sort(np.concatenate(validation)).astype(np.int64))


def _validation_nll(model, x, y):
    out = forward(model, x)
    return float(gaussian_nll(out.mu_std, out.sigma_std, y))


def train_member(index, seed, x, y, classes, cfg):
    """
    Train one member on standardized data.

    :param index: Position of the member in the ensemble.
    :param seed: Member seed; it drives the split, the initialization and
        the shuffling/dropout stream.
    :param x: Transformed features of the full training pool.
    :param y: Standardized targets.
    :param classes: Coarse class ids.
    :param cfg: A TrainConfig.
    :returns: ``(model, history)`` with the best-validation weights loaded.
    """
    split_seed, init_seed, noise_seed = derive_seeds(seed, 3)
    train_rows, val_rows = stratified_split(classes, cfg.validation_fraction,
                                            split_seed)
    if len(val_rows) == 0:
        LOGGER.warning("Member %d has no validation rows; early stopping "
                       "monitors the training rows.", index)
        val_rows = train_rows

    model = lecun_init(cfg.snn_spec(x.shape[1], init_seed))
    params = model.parameters()
    state = OptimizerState.for_parameters(cfg.optimizer, params)
    rng = np.random.default_rng(noise_seed)
    x_val, y_val = x[val_rows], y[val_rows]

    history = MemberHistory(member=index, seed=seed,
                            validation_nll=[_validation_nll(model, x_val,
                                                            y_val)],
                            train_rows=len(train_rows),
                            validation_rows=len(val_rows))
    best = [p.copy() for p in params]
    LOGGER.info("Member %d: training on %d rows, validating on %d rows "
                "(initial NLL %.6f).", index, len(train_rows), len(val_rows),
                history.validation_nll[0])

    def diverged(epoch, step, value):
        history.status = MemberStatus.DIVERGED
        return MemberDivergedError(index, epoch, step, value, history)

    waited = 0
    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(train_rows)
        for step, start in enumerate(range(0, len(order), cfg.batch_size)):
            batch = order[start:start + cfg.batch_size]
            tape = Tape()
            outputs = forward(model, x[batch], training=True, rng=rng,
                              tape=tape)
            try:
                loss = combined_loss(cfg.loss, outputs, y[batch],
                                     classes[batch])
            except ContractError:
                # A NaN sigma fails the positivity check.
                raise diverged(epoch, step, float("nan"))

            value = float(value_of(loss))
            if not math.isfinite(value):
                raise diverged(epoch, step, value)
            optimizer_step(state, params, tape.backward(loss))

        try:
            nll = _validation_nll(model, x_val, y_val)
        except ContractError:
            nll = float("nan")
        if not math.isfinite(nll):
            raise diverged(epoch, "validation", nll)

        history.validation_nll.append(nll)
        LOGGER.debug("Member %d, epoch %d: validation NLL %.6f", index,
                     epoch, nll)
        if nll < history.best_nll:
            history.best_epoch = epoch
            best = [p.copy() for p in params]
            waited = 0
        else:
            waited += 1
            if waited >= cfg.patience:
                history.status = MemberStatus.EARLY_STOPPED
                LOGGER.info("Member %d: early stop after epoch %d (best "
                            "epoch %d).", index, epoch, history.best_epoch)
                break

    model.load_parameters(best)
    LOGGER.info("Member %d finished: best validation NLL %.6f at epoch %d.",
                index, history.best_nll, history.best_epoch)
    return model, history


def _guarded_member(index, seed, x, y, classes, cfg):
    try:
        return train_member(index, seed, x, y, classes, cfg)
    except MemberDivergedError as e:
        LOGGER.error(str(e))
        return e


def train_ensemble(x, y, cfg=None, feature_columns=None, target_name=None):
    """
    Fit the pipeline on the training pool and train every member.

    :param x: Raw feature matrix (NaN for missing values).
    :param y: Target vector aligned with x.
    :param cfg: A TrainConfig (defaults when omitted).
    :param feature_columns: Names of the feature columns, kept for reports.
    :param target_name: Name of the target column, kept for evaluation.
    :returns: A fitted EnsembleModel.
    """
    cfg = cfg if cfg is not None else TrainConfig()
    x = as_matrix(x, name="features", allow_missing=True)
    y = as_vector(y, name="target")
    if len(y) != x.shape[0]:
        msg = "Target length {} does not match {} feature rows.".format(
            len(y), x.shape[0])
        LOGGER.error(msg)
        raise ShapeError(msg)

    pipeline = fit_pipeline(x, y, cfg.preprocess)
    xt = transform_features(pipeline, x)
    yt = transform_target(pipeline, y)
    classes = coarse_classes(pipeline, y, cfg.class_count)
    seeds = derive_seeds(cfg.seed, cfg.ensemble_size)
    LOGGER.info("Training %d members on %d rows with %d workers.",
                cfg.ensemble_size, x.shape[0], cfg.workers)

    jobs = [(i, seed, xt, yt, classes, cfg) for i, seed in enumerate(seeds)]
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(_guarded_member, *job) for job in jobs]
            # Results are kept by member index, not completion order.
            results = [future.result() for future in futures]
    else:
        results = [_guarded_member(*job) for job in jobs]

    failed = [r for r in results if isinstance(r, MemberDivergedError)]
    if len(failed) > cfg.max_abort_fraction * cfg.ensemble_size or \
            len(failed) == len(results):
        msg = "{} of {} members diverged, more than the allowed fraction " \
              "{}.".format(len(failed), cfg.ensemble_size,
                           cfg.max_abort_fraction)
        LOGGER.error(msg)
        raise TrainingError(msg)
    if failed:
        LOGGER.warning("Continuing with %d of %d members.",
                       len(results) - len(failed), len(results))

    kept = [(seed, r) for seed, r in zip(seeds, results)
            if not isinstance(r, MemberDivergedError)]
    return EnsembleModel([r[0] for _, r in kept], pipeline,
                         [seed for seed, _ in kept], cfg, feature_columns,
                         [r[1] for _, r in kept], target_name)


def member_outputs(ens, x):
    """
    Standardized-space outputs of every member.

    :param ens: An EnsembleModel.
    :param x: Raw feature matrix.
    :returns: Arrays ``(mu, sigma)`` of shape (members, rows).
    """
    xt = transform_features(ens.pipeline, x)
    outputs = [forward(member, xt) for member in ens.members]
    return (np.stack([o.mu_std for o in outputs]),
            np.stack([o.sigma_std for o in outputs]))


def member_predictions(ens, x):
    """Per-member ``(mu, sigma)`` in target units, shape (members, rows)."""
    mus, sigmas = member_outputs(ens, x)
    return inverse_target(ens.pipeline, mus, sigmas)


def _member_mean(values):
    # Sorting along the member axis makes the sum independent of member
    # order; rows where all members agree keep that exact value.
    ordered = np.sort(values, axis=0)
    mean = ordered.mean(axis=0)
    agree = ordered[0] == ordered[-1]
    return np.where(agree, ordered[0], mean)


def predict_arrays(ens, x):
    """
    Combine member predictions into the ensemble Gaussian.

    In standardized space the mean is the average member mean and the total
    variance is ``mean(sigma_i^2) + mean((mu_i - mu_bar)^2)``, i.e. the
    aleatoric part plus the epistemic part. Both are mapped back to target
    units.

    :param ens: An EnsembleModel.
    :param x: Raw feature matrix with the fitted column count.
    :returns: A PredictionBatch of vectors.
    """
    mus, sigmas = member_outputs(ens, x)
    mu_bar = _member_mean(mus)
    aleatoric = _member_mean(sigmas * sigmas)
    epistemic = _member_mean((mus - mu_bar) ** 2)
    total = aleatoric + epistemic

    scale = ens.pipeline.target_scale
    mu_out, sigma_out = inverse_target(ens.pipeline, mu_bar, np.sqrt(total))
    return PredictionBatch(mu=mu_out, sigma=sigma_out,
                           uncertainty=total * scale * scale,
                           aleatoric=aleatoric * scale * scale,
                           epistemic=epistemic * scale * scale)


def predict(ens, x):
    """
    Predict a Gaussian per row.

    :returns: A list of GaussianPrediction(mu, sigma, uncertainty).
    """
    batch = predict_arrays(ens, x)
    return [GaussianPrediction(float(m), float(s), float(u))
            for m, s, u in zip(batch.mu, batch.sigma, batch.uncertainty)]
