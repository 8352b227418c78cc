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
Reverse-mode gradient recording for fixed feed-forward topologies.

Every primitive in this module accepts either plain arrays or Nodes. When
none of its operands is a Node the primitive simply computes its value, so the
same code path serves inference (no tape) and training (tape). When at least
one operand is a Node the result is appended to that operand's Tape together
with a vector-Jacobian product closure. Nodes are appended in evaluation
order, hence a Tape is always topologically sorted and ``backward`` is a single
reverse sweep.

A Tape is rebuilt for every batch and must stay on one thread.
"""
import logging

import numpy as np

from snnuq.errors import ContractError
from snnuq.numerics.matrix import DTYPE, check_matmul_shapes

LOGGER = logging.getLogger(__name__)

# SELU constants at the precision used throughout the package. The exact
# fixed-point values are 1.0507009873554805 and 1.6732632423543772.
SELU_LAMBDA = 1.0507
SELU_ALPHA = 1.6733
SELU_SATURATION = -SELU_LAMBDA * SELU_ALPHA


class Node:
    """A value recorded on a Tape."""

    __slots__ = ("tape", "index", "value", "parents", "vjp", "is_parameter",
                 "grad")

    def __init__(self, tape, index, value, parents=(), vjp=None,
                 is_parameter=False):
        self.tape = tape
        self.index = index
        self.value = value
        self.parents = parents
        self.vjp = vjp
        self.is_parameter = is_parameter
        self.grad = None

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        kind = "parameter" if self.is_parameter else "op"
        return "Node({}, index={}, shape={})".format(kind, self.index,
                                                     self.shape)


class Tape:
    """
    Ordered record of primitive operations for one backward pass.

    Parameters registered with ``parameter`` are the leaves gradients are
    collected for; after ``backward`` each of them holds dLoss/dTheta in its
    ``grad`` attribute.
    """

    def __init__(self):
        """Initialize an empty tape."""
        self._nodes = []
        self._parameters = []

    def __len__(self):
        return len(self._nodes)

    @property
    def nodes(self):
        return tuple(self._nodes)

    @property
    def parameters(self):
        return tuple(self._parameters)

    def parameter(self, value):
        """
        Register a tracked leaf.

        :param value: Array holding the current parameter value. The array is
            referenced, not copied; it must not change until backward ran.
        :returns: The Node standing for the parameter.
        """
        node = Node(self, len(self._nodes), np.asarray(value, dtype=DTYPE),
                    is_parameter=True)
        self._nodes.append(node)
        self._parameters.append(node)
        return node

    def record(self, value, parents, vjp):
        """
        Append the result of a primitive.

        :param value: Result of the primitive.
        :param parents: Operands of the primitive (Nodes or arrays).
        :param vjp: Callable mapping the adjoint of the result to a tuple of
            adjoints, one per operand (None for untracked operands).
        :returns: The new Node.
        """
        node = Node(self, len(self._nodes), value, tuple(parents), vjp)
        self._nodes.append(node)
        return node

    def backward(self, loss):
        """
        Run reverse accumulation from a scalar loss node.

        :param loss: Node holding a scalar value recorded on this tape.
        :returns: A list of gradients aligned with ``parameters``.
        """
        if not isinstance(loss, Node) or loss.tape is not self:
            msg = "The loss must be a node recorded on this tape."
            LOGGER.error(msg)
            raise ContractError(msg)

        if np.size(loss.value) != 1:
            msg = "The loss must be scalar, got shape {}.".format(
                np.shape(loss.value))
            LOGGER.error(msg)
            raise ContractError(msg)

        adjoints = [None] * len(self._nodes)
        adjoints[loss.index] = np.ones_like(loss.value, dtype=DTYPE)

        for index in range(loss.index, -1, -1):
            node = self._nodes[index]
            adjoint = adjoints[index]
            if adjoint is None or node.vjp is None:
                continue

            for parent, grad in zip(node.parents, node.vjp(adjoint)):
                if grad is None or not isinstance(parent, Node):
                    continue
                if adjoints[parent.index] is None:
                    adjoints[parent.index] = grad
                else:
                    adjoints[parent.index] = adjoints[parent.index] + grad

        for node in self._parameters:
            grad = adjoints[node.index]
            node.grad = np.zeros_like(node.value) if grad is None else grad

        return [node.grad for node in self._parameters]


def backward(tape, loss_node):
    """
    Compute gradients of a scalar loss for every tracked parameter.

    :param tape: The Tape the loss was recorded on.
    :param loss_node: Scalar Node.
    :returns: A list of gradients aligned with ``tape.parameters``.
    """
    return tape.backward(loss_node)


def value_of(operand):
    """Return the array behind an operand."""
    if isinstance(operand, Node):
        return operand.value
    return np.asarray(operand, dtype=DTYPE)


def _tape_of(operands):
    tape = None
    for operand in operands:
        if isinstance(operand, Node):
            if tape is not None and operand.tape is not tape:
                msg = "Operands are recorded on different tapes."
                LOGGER.error(msg)
                raise ContractError(msg)
            tape = operand.tape
    return tape


def _emit(value, operands, vjp):
    tape = _tape_of(operands)
    if tape is None:
        return value
    return tape.record(value, operands, vjp)


def _unbroadcast(grad, shape):
    """Sum an adjoint back down to the shape of a broadcast operand."""
    grad = np.asarray(grad)
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def matmul(a, b):
    """Matrix product, recorded when either operand is tracked."""
    av, bv = value_of(a), value_of(b)
    check_matmul_shapes(av.shape, bv.shape)

    def vjp(g):
        return g @ bv.T, av.T @ g

    return _emit(av @ bv, (a, b), vjp)


def transpose(x):
    xv = value_of(x)
    return _emit(xv.T, (x,), lambda g: (g.T,))


def add(a, b):
    av, bv = value_of(a), value_of(b)

    def vjp(g):
        return _unbroadcast(g, av.shape), _unbroadcast(g, bv.shape)

    return _emit(av + bv, (a, b), vjp)


def sub(a, b):
    av, bv = value_of(a), value_of(b)

    def vjp(g):
        return _unbroadcast(g, av.shape), _unbroadcast(-g, bv.shape)

    return _emit(av - bv, (a, b), vjp)


def mul(a, b):
    av, bv = value_of(a), value_of(b)

    def vjp(g):
        return _unbroadcast(g * bv, av.shape), _unbroadcast(g * av, bv.shape)

    return _emit(av * bv, (a, b), vjp)


def div(a, b):
    av, bv = value_of(a), value_of(b)

    def vjp(g):
        return (_unbroadcast(g / bv, av.shape),
                _unbroadcast(-g * av / (bv * bv), bv.shape))

    return _emit(av / bv, (a, b), vjp)


def square(x):
    xv = value_of(x)
    return _emit(xv * xv, (x,), lambda g: (2.0 * xv * g,))


def exp(x):
    out = np.exp(value_of(x))
    return _emit(out, (x,), lambda g: (g * out,))


def log(x):
    xv = value_of(x)
    return _emit(np.log(xv), (x,), lambda g: (g / xv,))


def selu(x):
    """Scaled exponential linear unit, elementwise."""
    xv = value_of(x)
    positive = xv > 0
    # Clip the exponent so huge positive inputs cannot overflow the
    # discarded branch.
    expx = np.exp(np.minimum(xv, 0.0))
    out = np.where(positive, SELU_LAMBDA * xv,
                   SELU_LAMBDA * (SELU_ALPHA * expx - SELU_ALPHA))

    def vjp(g):
        slope = np.where(positive, SELU_LAMBDA,
                         SELU_LAMBDA * SELU_ALPHA * expx)
        return (g * slope,)

    return _emit(out, (x,), vjp)


def softplus(x):
    """Numerically stable log(1 + e^x), elementwise."""
    xv = value_of(x)
    out = np.logaddexp(0.0, xv)

    def vjp(g):
        return (g * 0.5 * (1.0 + np.tanh(0.5 * xv)),)

    return _emit(out, (x,), vjp)


def reduce_sum(x, axis=None, keepdims=False):
    """Sum of all entries, or along ``axis``."""
    xv = value_of(x)
    out = xv.sum(axis=axis, keepdims=keepdims)

    def vjp(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, xv.shape).copy(),)

    return _emit(out, (x,), vjp)


def reduce_mean(x):
    """Mean of all entries as a scalar."""
    xv = value_of(x)
    count = float(xv.size)

    def vjp(g):
        return (np.full(xv.shape, g / count, dtype=DTYPE),)

    return _emit(np.asarray(xv.sum() / count), (x,), vjp)


def column(x, j):
    """Column ``j`` of a matrix as a vector."""
    xv = value_of(x)

    def vjp(g):
        grad = np.zeros_like(xv)
        grad[:, j] = g
        return (grad,)

    return _emit(xv[:, j].copy(), (x,), vjp)


def row_normalize(x, floor=1e-12):
    """Scale every row to unit Euclidean length."""
    xv = value_of(x)
    norms = np.maximum(np.sqrt((xv * xv).sum(axis=1, keepdims=True)), floor)
    out = xv / norms

    def vjp(g):
        radial = (g * out).sum(axis=1, keepdims=True)
        return ((g - out * radial) / norms,)

    return _emit(out, (x,), vjp)


def masked_logsumexp(x, mask):
    """
    Row-wise log-sum-exp over the entries selected by ``mask``.

    Rows without any selected entry yield 0 and receive no gradient.

    :param x: Matrix of scores.
    :param mask: Boolean matrix of the same shape.
    :returns: A column (rows x 1).
    """
    xv = value_of(x)
    mask = np.asarray(mask, dtype=bool)
    has_any = mask.any(axis=1, keepdims=True)

    peak = np.where(mask, xv, -np.inf).max(axis=1, keepdims=True)
    peak = np.where(has_any, peak, 0.0)
    shifted = np.where(mask, np.exp(xv - peak), 0.0)
    total = np.where(has_any, shifted.sum(axis=1, keepdims=True), 1.0)
    out = np.where(has_any, peak + np.log(total), 0.0)
    weights = shifted / total

    return _emit(out, (x,), lambda g: (g * weights,))
