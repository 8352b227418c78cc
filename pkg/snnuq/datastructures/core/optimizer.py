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
"""Rectified Adam with Lookahead slow/fast weight synchronization."""
from dataclasses import dataclass
import logging
import math

import numpy as np

from snnuq.abstracts import PickleInterface
from snnuq.errors import ContractError, ShapeError

LOGGER = logging.getLogger(__name__)

# Below this length of the approximated simple moving average the variance of
# the adaptive learning rate is intractable and the plain momentum step runs.
RHO_THRESHOLD = 4.0


@dataclass(frozen=True)
class OptimizerConfig:
    """Hyperparameters of RAdam and its Lookahead wrapper."""

    learning_rate: float = 0.0003
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    sync_period: int = 6
    slow_step: float = 0.5
    clip_norm: float = 0.0

    def __post_init__(self):
        problems = []
        if not self.learning_rate > 0:
            problems.append("learning_rate must be positive")
        if not 0 <= self.beta1 < 1:
            problems.append("beta1 must lie in [0, 1)")
        if not 0 < self.beta2 < 1:
            problems.append("beta2 must lie in (0, 1)")
        if not self.epsilon > 0:
            problems.append("epsilon must be positive")
        if self.sync_period < 1:
            problems.append("sync_period must be at least 1")
        if not 0 < self.slow_step <= 1:
            problems.append("slow_step must lie in (0, 1]")
        if self.clip_norm < 0:
            problems.append("clip_norm must be non-negative")

        if problems:
            msg = "Invalid optimizer configuration: {}.".format(
                "; ".join(problems))
            LOGGER.error(msg)
            raise ContractError(msg)

    @property
    def rho_inf(self):
        return 2.0 / (1.0 - self.beta2) - 1.0

    def rho(self, step):
        """Length of the approximated simple moving average at ``step``."""
        beta2_t = self.beta2 ** step
        return self.rho_inf - 2.0 * step * beta2_t / (1.0 - beta2_t)

    def rectification(self, step):
        """
        Variance rectification factor r_t.

        Only defined where ``rho(step) > 4``.
        """
        rho_t = self.rho(step)
        rho_inf = self.rho_inf
        return math.sqrt(((rho_t - 4.0) * (rho_t - 2.0) * rho_inf) /
                         ((rho_inf - 4.0) * (rho_inf - 2.0) * rho_t))


class OptimizerState(PickleInterface):
    """
    Mutable state of one optimizer instance.

    Holds the step counter, the first and second moment buffers and the
    Lookahead slow weights. States can be checkpointed with ``pickle`` and
    restored with ``unpickle``.
    """

    def __init__(self, config, first_moments, second_moments, slow_weights,
                 step=0, syncs=0):
        if step < 0:
            raise ContractError("Optimizer step must be non-negative.")
        self.config = config
        self.first_moments = first_moments
        self.second_moments = second_moments
        self.slow_weights = slow_weights
        self.step = step
        self.syncs = syncs
        self.last_rectified = None

    @classmethod
    def for_parameters(cls, config, params):
        """
        Create a fresh state for a list of parameter arrays.

        :param config: An OptimizerConfig.
        :param params: Parameter arrays the state will update.
        :returns: An OptimizerState at step 0, slow weights equal to params.
        """
        return cls(
            config,
            [np.zeros_like(p) for p in params],
            [np.zeros_like(p) for p in params],
            [np.array(p, copy=True) for p in params],
        )

    def check_compatible(self, params, grads=None):
        if len(params) != len(self.first_moments) or \
                (grads is not None and len(grads) != len(params)):
            msg = "Optimizer tracks {} parameters, got {}.".format(
                len(self.first_moments), len(params))
            LOGGER.error(msg)
            raise ShapeError(msg)

        for index, param in enumerate(params):
            expected = self.first_moments[index].shape
            if np.shape(param) != expected or \
                    (grads is not None and np.shape(grads[index]) != expected):
                msg = "Parameter {} has shape {}, optimizer expects {}." \
                      .format(index, np.shape(param), expected)
                LOGGER.error(msg)
                raise ShapeError(msg)


def clip_gradients(grads, max_norm):
    """
    Rescale a gradient list so that its global L2 norm is at most max_norm.

    :returns: The (possibly rescaled) gradients and the original norm.
    """
    norm = math.sqrt(sum(float(np.sum(g * g)) for g in grads))
    if max_norm > 0 and norm > max_norm:
        scale = max_norm / norm
        grads = [g * scale for g in grads]
    return grads, norm


def radam_step(state, params, grads):
    """
    Apply one Rectified Adam update to ``params`` in place.

    :param state: OptimizerState; its step counter is advanced.
    :param params: Parameter arrays, updated in place.
    :param grads: Gradients aligned with ``params``.
    :returns: ``params``.
    """
    state.check_compatible(params, grads)
    cfg = state.config
    if cfg.clip_norm > 0:
        grads, _ = clip_gradients(grads, cfg.clip_norm)

    state.step += 1
    step = state.step
    bias1 = 1.0 - cfg.beta1 ** step
    bias2 = 1.0 - cfg.beta2 ** step
    rectified = cfg.rho(step) > RHO_THRESHOLD
    if rectified:
        rate = cfg.learning_rate * cfg.rectification(step)

    for param, grad, m, v in zip(params, grads, state.first_moments,
                                 state.second_moments):
        m *= cfg.beta1
        m += (1.0 - cfg.beta1) * grad
        v *= cfg.beta2
        v += (1.0 - cfg.beta2) * grad * grad
        m_hat = m / bias1

        if rectified:
            v_hat = np.sqrt(v / bias2)
            param -= rate * m_hat / (v_hat + cfg.epsilon)
        else:
            param -= cfg.learning_rate * m_hat

    state.last_rectified = rectified
    return params


def lookahead_sync(state, params):
    """
    Pull the slow weights toward the fast weights every ``sync_period`` steps.

    On a sync step ``slow <- slow + slow_step * (fast - slow)`` and the fast
    weights are reset to the new slow weights. Other steps are no-ops.

    :param state: OptimizerState after the fast step.
    :param params: Fast weights, updated in place.
    :returns: ``params``.
    """
    cfg = state.config
    if state.step == 0 or state.step % cfg.sync_period:
        return params

    state.check_compatible(params)
    for fast, slow in zip(params, state.slow_weights):
        if cfg.slow_step == 1.0:
            slow[...] = fast
        else:
            slow += cfg.slow_step * (fast - slow)
            fast[...] = slow
    state.syncs += 1
    return params


def optimizer_step(state, params, grads):
    """One RAdam step followed by a Lookahead synchronization check."""
    radam_step(state, params, grads)
    return lookahead_sync(state, params)
