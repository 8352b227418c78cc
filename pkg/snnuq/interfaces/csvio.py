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
"""Reading and writing numeric CSV tables."""
import logging

import numpy as np
import pandas as pd

from snnuq.abstracts.enums import SplitTag
from snnuq.datastructures import Dataset
from snnuq.errors import DataFormatError
from snnuq.numerics import DTYPE
from snnuq.utils import ensure_parent_of

LOGGER = logging.getLogger(__name__)

MISSING_TOKENS = frozenset(["", "nan"])
FLOAT_FORMAT = "%.17g"
PREDICTION_COLUMNS = ["mu", "sigma", "uncertainty"]
DECOMPOSITION_COLUMNS = ["aleatoric", "epistemic"]


def _parse_column(name, cells):
    """
    Convert the raw text cells of one column to floats.

    :param name: Column name, used in error messages.
    :param cells: Array of strings.
    :returns: A float64 vector with NaN for missing cells.
    """
    cleaned = np.array([c.strip() for c in cells], dtype=object)
    missing = np.array([c.lower() in MISSING_TOKENS for c in cleaned],
                       dtype=bool)
    cleaned[missing] = "nan"
    try:
        values = cleaned.astype(str).astype(DTYPE)
    except ValueError:
        for index, cell in enumerate(cleaned):
            try:
                float(cell)
            except ValueError:
                raise DataFormatError(
                    "Cannot parse '{}' as a number".format(cell),
                    row=index + 2, column=name)
        raise

    infinite = np.flatnonzero(np.isinf(values))
    if infinite.size:
        raise DataFormatError("Infinite values are not supported",
                              row=int(infinite[0]) + 2, column=name)
    return values


def read_table(path):
    """
    Read a CSV file with a header row into a frame of floats.

    Empty cells and ``nan`` (any case) are missing values.

    :param path: Path to the CSV file.
    :returns: A pandas DataFrame of float64 columns.
    """
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False,
                          skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise DataFormatError("File {} has no header row.".format(path))
    except pd.errors.ParserError as e:
        raise DataFormatError("File {} is not valid CSV: {}".format(path, e))

    raw.columns = [str(c).strip() for c in raw.columns]
    frame = pd.DataFrame(
        {name: _parse_column(name, raw[name].to_numpy())
         for name in raw.columns},
        columns=raw.columns)
    LOGGER.debug("Read %d rows and %d columns from %s.", len(frame),
                 len(frame.columns), path)
    return frame


def load_csv(path, target_column=None, exclude_columns=(),
             split_tag=SplitTag.TRAIN, feature_columns=None):
    """
    Load a numeric CSV file as a Dataset.

    :param path: Path to the CSV file.
    :param target_column: Name of the target column, or None.
    :param exclude_columns: Meta columns to drop from the features.
    :param split_tag: SplitTag of the loaded partition.
    :param feature_columns: Exact feature columns to select, in order; when
        given, ``exclude_columns`` is ignored.
    :returns: A Dataset.
    """
    frame = read_table(path)
    if target_column is not None and target_column not in frame.columns:
        msg = "Target column '{}' not found in {}.".format(target_column,
                                                           path)
        LOGGER.error(msg)
        raise DataFormatError(msg)

    if feature_columns is not None:
        absent = [c for c in feature_columns if c not in frame.columns]
        if absent:
            msg = "Feature column(s) {} not found in {}.".format(
                ", ".join(absent), path)
            LOGGER.error(msg)
            raise DataFormatError(msg)
        columns = list(feature_columns)
    else:
        unknown = [c for c in exclude_columns if c not in frame.columns]
        if unknown:
            LOGGER.warning("Excluded columns %s are not present in %s.",
                           unknown, path)
        dropped = set(exclude_columns)
        if target_column is not None:
            dropped.add(target_column)
        columns = [c for c in frame.columns if c not in dropped]

    target = None
    if target_column is not None:
        target = frame[target_column].to_numpy()
        holes = np.flatnonzero(np.isnan(target))
        if holes.size:
            raise DataFormatError("Missing target value",
                                  row=int(holes[0]) + 2, column=target_column)

    return Dataset(frame[columns].to_numpy(dtype=DTYPE), target, split_tag,
                   columns, target_column)


def write_dataset(dataset, path):
    """
    Write a Dataset as CSV; missing values become empty cells.

    :param dataset: The Dataset to write.
    :param path: Destination path.
    """
    frame = pd.DataFrame(np.asarray(dataset.features), columns=dataset.columns)
    if dataset.has_target:
        frame[dataset.target_name or "target"] = np.asarray(dataset.target)
    ensure_parent_of(path)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="")


def write_predictions(batch, path, decompose=False):
    """
    Write ensemble predictions as CSV.

    :param batch: A PredictionBatch.
    :param path: Destination path.
    :param decompose: Append the aleatoric and epistemic columns.
    """
    columns = PREDICTION_COLUMNS + (DECOMPOSITION_COLUMNS if decompose else [])
    frame = pd.DataFrame({name: np.asarray(getattr(batch, name))
                          for name in columns}, columns=columns)
    ensure_parent_of(path)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
