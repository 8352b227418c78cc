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
Training objectives of one network.

The high-level regression head is trained with the Gaussian negative
log-likelihood, the low-level head with either a supervised N-pairs
contrastive loss over coarse target classes or a softmax crossentropy over the
same classes. Every function accepts plain arrays or tape Nodes, so the same
code computes reported values and recorded training losses.
"""
from dataclasses import dataclass
import logging

import numpy as np

from snnuq.abstracts.enums import AuxKind
from snnuq.errors import ContractError, ShapeError
from snnuq.numerics import (
    DTYPE,
    add,
    div,
    log,
    masked_logsumexp,
    matmul,
    mul,
    reduce_mean,
    reduce_sum,
    square,
    sub,
    transpose,
    value_of,
)

LOGGER = logging.getLogger(__name__)

HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass(frozen=True)
class MultitaskLoss:
    """Weights and kind of the two training objectives."""

    nll_weight: float = 1.0
    aux_weight: float = 1.0
    aux_kind: AuxKind = AuxKind.CONTRASTIVE
    temperature: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "aux_kind", AuxKind(self.aux_kind))
        if self.nll_weight < 0 or self.aux_weight < 0:
            msg = "Loss weights must be non-negative, got nll_weight={} and " \
                  "aux_weight={}.".format(self.nll_weight, self.aux_weight)
            LOGGER.error(msg)
            raise ContractError(msg)
        if not self.temperature > 0:
            msg = "Contrastive temperature must be positive, got {}." \
                  .format(self.temperature)
            LOGGER.error(msg)
            raise ContractError(msg)

    @property
    def uses_aux(self):
        return self.aux_weight > 0 and self.aux_kind is not AuxKind.NONE


def gaussian_nll(mu, sigma, y):
    """
    Mean negative log-likelihood of ``y`` under N(mu, sigma^2).

    :param mu: Predicted means (vector).
    :param sigma: Predicted standard deviations, strictly positive.
    :param y: Targets.
    :returns: A scalar (array or Node).
    """
    shapes = {np.shape(value_of(v)) for v in (mu, sigma, y)}
    if len(shapes) != 1:
        msg = "gaussian_nll needs equal shapes, got mu {}, sigma {}, y {}." \
              .format(np.shape(value_of(mu)), np.shape(value_of(sigma)),
                      np.shape(value_of(y)))
        LOGGER.error(msg)
        raise ShapeError(msg)

    if not (value_of(sigma) > 0).all():
        msg = "gaussian_nll requires strictly positive sigma."
        LOGGER.error(msg)
        raise ContractError(msg)

    residual = square(sub(y, mu))
    per_row = add(log(sigma), div(residual, mul(2.0, square(sigma))))
    return add(reduce_mean(per_row), HALF_LOG_2PI)


def npairs_contrastive(projections, class_ids, temperature=0.1):
    """
    Supervised N-pairs contrastive loss.

    For anchor i with positives P(i) (same class, other rows) the term is
    ``-1/|P(i)| * sum_p log(exp(z_i.z_p / t) / sum_{a != i} exp(z_i.z_a / t))``
    Terms are averaged over the anchors that have at least one positive.
    Batches with fewer than two classes contribute 0.

    :param projections: Row-normalized projection matrix (N x d).
    :param class_ids: Integer class of every row.
    :param temperature: Softmax temperature, positive.
    :returns: A scalar (array or Node).
    """
    labels = np.asarray(class_ids).reshape(-1)
    count = value_of(projections).shape[0]
    if labels.shape[0] != count:
        msg = "Got {} class ids for {} projections.".format(
            labels.shape[0], count)
        LOGGER.error(msg)
        raise ShapeError(msg)

    if np.unique(labels).size < 2:
        return np.asarray(0.0, dtype=DTYPE)

    others = ~np.eye(count, dtype=bool)
    positives = (labels[:, None] == labels[None, :]) & others
    positive_counts = positives.sum(axis=1)
    anchors = positive_counts > 0
    n_anchors = int(anchors.sum())
    if n_anchors == 0:
        return np.asarray(0.0, dtype=DTYPE)

    similarity = mul(matmul(projections, transpose(projections)),
                     1.0 / temperature)
    denominators = masked_logsumexp(similarity, others)

    pair_weights = np.zeros((count, count), dtype=DTYPE)
    pair_weights[anchors] = positives[anchors] / \
        positive_counts[anchors, None] / n_anchors
    anchor_weights = (anchors / n_anchors).astype(DTYPE).reshape(-1, 1)

    return sub(reduce_sum(mul(denominators, anchor_weights)),
               reduce_sum(mul(similarity, pair_weights)))


def crossentropy_head(logits, class_ids):
    """
    Mean softmax crossentropy of the low-level head.

    :param logits: Matrix with one column per class.
    :param class_ids: Integer class of every row, in ``[0, columns)``.
    :returns: A scalar (array or Node).
    """
    rows, classes = value_of(logits).shape
    labels = np.asarray(class_ids).reshape(-1)
    if labels.shape[0] != rows:
        msg = "Got {} class ids for {} logit rows.".format(
            labels.shape[0], rows)
        LOGGER.error(msg)
        raise ShapeError(msg)

    if labels.size and (labels.min() < 0 or labels.max() >= classes
                        or not np.all(labels == np.round(labels))):
        msg = "Class ids must be integers in [0, {}).".format(classes)
        LOGGER.error(msg)
        raise ContractError(msg)

    onehot = np.zeros((rows, classes), dtype=DTYPE)
    onehot[np.arange(rows), labels.astype(int)] = 1.0

    normalizer = masked_logsumexp(logits, np.ones((rows, classes), bool))
    true_logit = reduce_sum(mul(logits, onehot), axis=1, keepdims=True)
    return reduce_mean(sub(normalizer, true_logit))


def auxiliary_loss(cfg, projection, class_ids):
    """Low-level task loss selected by ``cfg.aux_kind``."""
    if cfg.aux_kind is AuxKind.CONTRASTIVE:
        return npairs_contrastive(projection, class_ids, cfg.temperature)
    if cfg.aux_kind is AuxKind.CROSSENTROPY:
        return crossentropy_head(projection, class_ids)
    return np.asarray(0.0, dtype=DTYPE)


def combined_loss(cfg, outputs, y, class_ids):
    """
    Weighted multitask objective ``nll_weight * NLL + aux_weight * aux``.

    :param cfg: A MultitaskLoss.
    :param outputs: ForwardResult of the network.
    :param y: Standardized targets.
    :param class_ids: Coarse class of every row.
    :returns: A scalar (array or Node).
    """
    total = mul(gaussian_nll(outputs.mu_std, outputs.sigma_std, y),
                cfg.nll_weight)
    if not cfg.uses_aux:
        return total

    aux = auxiliary_loss(cfg, outputs.projection, class_ids)
    return add(total, mul(aux, cfg.aux_weight))
