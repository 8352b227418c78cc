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
Dense 64-bit matrices.

A Matrix is a two dimensional, row-major, read-only ``numpy.ndarray`` of
float64. Values coming from outside the package go through ``as_matrix``,
which is where non-finite entries are rejected; intermediate results of the
arithmetic below are trusted.
"""
import logging

import numpy as np

from snnuq.errors import ContractError, ShapeError

LOGGER = logging.getLogger(__name__)

DTYPE = np.float64


def as_matrix(data, name="matrix", allow_missing=False):
    """
    Build an immutable Matrix from external input.

    :param data: Anything ``numpy.asarray`` accepts; 1-D input becomes a
        single column.
    :param name: Label used in error messages.
    :param allow_missing: Accept NaN entries (missing values) while still
        rejecting infinities.
    :returns: A C-contiguous, read-only float64 array with two dimensions.
    """
    try:
        matrix = np.array(data, dtype=DTYPE, order="C", copy=True)
    except (TypeError, ValueError) as e:
        msg = "Cannot interpret {} as a real matrix: {}".format(name, e)
        LOGGER.error(msg)
        raise ContractError(msg)

    if matrix.ndim == 1:
        matrix = matrix.reshape(-1, 1)
    if matrix.ndim != 2:
        msg = "{} must have two dimensions, got shape {}." \
              .format(name, matrix.shape)
        LOGGER.error(msg)
        raise ShapeError(msg)

    if allow_missing:
        bad = np.isinf(matrix)
    else:
        bad = ~np.isfinite(matrix)
    if bad.any():
        row, col = np.argwhere(bad)[0]
        msg = "{} contains a non-finite entry at ({}, {}).".format(
            name, row, col)
        LOGGER.error(msg)
        raise ContractError(msg)

    matrix.setflags(write=False)
    return matrix


def as_vector(data, name="vector"):
    """
    Build an immutable, finite float64 vector from external input.

    :param data: A sequence of reals.
    :param name: Label used in error messages.
    :returns: A read-only 1-D float64 array.
    """
    vector = np.array(data, dtype=DTYPE, copy=True).reshape(-1)
    if not np.isfinite(vector).all():
        msg = "{} contains non-finite entries.".format(name)
        LOGGER.error(msg)
        raise ContractError(msg)
    vector.setflags(write=False)
    return vector


def check_matmul_shapes(a_shape, b_shape):
    """Raise a ShapeError unless ``a_shape @ b_shape`` is conforming."""
    if len(a_shape) != 2 or len(b_shape) != 2 or a_shape[1] != b_shape[0]:
        msg = "Cannot multiply a {} matrix by a {} matrix.".format(
            "x".join(map(str, a_shape)), "x".join(map(str, b_shape)))
        LOGGER.error(msg)
        raise ShapeError(msg)


def identity(n):
    """Return the n x n identity as a read-only Matrix."""
    eye = np.eye(n, dtype=DTYPE)
    eye.setflags(write=False)
    return eye
