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
Dense matrix arithmetic and a reverse-mode gradient engine.

Matrices are plain float64 ``numpy`` arrays; the Tape records the primitives
below whenever one of their operands is a tracked Node.
"""
from snnuq.numerics.matrix import (
    DTYPE,
    as_matrix,
    as_vector,
    identity,
)
from snnuq.numerics.tape import (
    SELU_ALPHA,
    SELU_LAMBDA,
    SELU_SATURATION,
    Node,
    Tape,
    add,
    backward,
    column,
    div,
    exp,
    log,
    masked_logsumexp,
    matmul,
    mul,
    reduce_mean,
    reduce_sum,
    row_normalize,
    selu,
    softplus,
    square,
    sub,
    transpose,
    value_of,
)

__all__ = (
    "DTYPE", "SELU_ALPHA", "SELU_LAMBDA", "SELU_SATURATION", "Node", "Tape",
    "add", "as_matrix", "as_vector", "backward", "column", "div", "exp",
    "identity", "log", "masked_logsumexp", "matmul", "mul", "reduce_mean",
    "reduce_sum", "row_normalize", "selu", "softplus", "square", "sub",
    "transpose", "value_of",
)
