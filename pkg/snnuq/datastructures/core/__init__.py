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
"""Core learning machinery of snnuq."""
from snnuq.datastructures.core.ensemble import (
    EnsembleModel,
    GaussianPrediction,
    MemberHistory,
    PredictionBatch,
    TrainConfig,
    member_predictions,
    predict,
    predict_arrays,
    stratified_split,
    train_ensemble,
    train_member,
)
from snnuq.datastructures.core.losses import (
    MultitaskLoss,
    combined_loss,
    crossentropy_head,
    gaussian_nll,
    npairs_contrastive,
)
from snnuq.datastructures.core.optimizer import (
    OptimizerConfig,
    OptimizerState,
    lookahead_sync,
    optimizer_step,
    radam_step,
)
from snnuq.datastructures.core.pipeline import (
    FittedPipeline,
    PreprocessConfig,
    coarse_classes,
    fit_pipeline,
    inverse_target,
    transform_features,
    transform_target,
)
from snnuq.datastructures.core.retention import (
    RetentionCurve,
    evaluate_splits,
    r_auc_mse,
    retention_curve,
)
from snnuq.datastructures.core.snn import (
    SIGMA_FLOOR,
    SnnModel,
    SnnSpec,
    alpha_dropout,
    forward,
    lecun_init,
    trace_activations,
)

__all__ = (
    "EnsembleModel", "FittedPipeline", "GaussianPrediction", "MemberHistory",
    "MultitaskLoss", "OptimizerConfig", "OptimizerState", "PredictionBatch",
    "PreprocessConfig", "RetentionCurve", "SIGMA_FLOOR", "SnnModel",
    "SnnSpec", "TrainConfig", "alpha_dropout", "coarse_classes",
    "combined_loss", "crossentropy_head", "evaluate_splits", "fit_pipeline",
    "forward", "gaussian_nll", "inverse_target", "lecun_init",
    "lookahead_sync", "member_predictions", "npairs_contrastive",
    "optimizer_step", "predict", "predict_arrays", "r_auc_mse", "radam_step",
    "retention_curve", "stratified_split", "trace_activations",
    "train_ensemble", "train_member", "transform_features",
    "transform_target",
)
