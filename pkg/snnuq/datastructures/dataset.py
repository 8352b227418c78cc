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
"""Tabular datasets tagged with the partition they come from."""
import logging

import numpy as np

from snnuq.abstracts.enums import SplitTag
from snnuq.errors import ShapeError
from snnuq.numerics import as_matrix, as_vector

LOGGER = logging.getLogger(__name__)


class Dataset:
    """A feature matrix with an optional target and a split tag."""

    def __init__(self, features, target=None, split_tag=SplitTag.TRAIN,
                 columns=None, target_name=None):
        """
        Initialize a Dataset.

        :param features: Matrix of raw features; NaN marks missing values.
        :param target: Optional target vector aligned with the rows.
        :param split_tag: SplitTag (or its value) of the partition.
        :param columns: Names of the feature columns.
        :param target_name: Name of the target column, if any.
        """
        self.features = as_matrix(features, name="features",
                                  allow_missing=True)
        self.target = None if target is None else \
            as_vector(target, name="target")
        if self.target is not None and \
                len(self.target) != self.features.shape[0]:
            msg = "Target length {} does not match {} feature rows.".format(
                len(self.target), self.features.shape[0])
            LOGGER.error(msg)
            raise ShapeError(msg)

        if columns is None:
            columns = ["x{}".format(i) for i in range(self.features.shape[1])]
        if len(columns) != self.features.shape[1]:
            msg = "Got {} column names for {} feature columns.".format(
                len(columns), self.features.shape[1])
            LOGGER.error(msg)
            raise ShapeError(msg)

        self.columns = list(columns)
        self.target_name = target_name
        self.split_tag = SplitTag(split_tag)

    def __len__(self):
        return self.features.shape[0]

    def __repr__(self):
        return "Dataset({}, rows={}, columns={}, target={})".format(
            self.split_tag.value, len(self), len(self.columns),
            self.target_name)

    @property
    def has_target(self):
        return self.target is not None

    def missing_fraction(self):
        """Fraction of feature cells that are missing."""
        if self.features.size == 0:
            return 0.0
        return float(np.isnan(self.features).mean())

    def with_tag(self, split_tag):
        """Return the same data under another split tag."""
        return Dataset(self.features, self.target, split_tag, self.columns,
                       self.target_name)
