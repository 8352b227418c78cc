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
Input and target preprocessing.

Inputs go through four stages, each fitted on the training pool only:

1. imputing: missing values (NaN) are replaced by a constant fill value;
2. quantization: every column is discretized into quantile bins and the bin
   identifier replaces the raw value;
3. standardization: each quantized column gets zero mean and unit variance;
4. decorrelation: the standardized columns are rotated onto their principal
   axes (no whitening).

Every stage is a scikit-learn estimator. Targets are only standardized. The
fitted state is a frozen FittedPipeline that transforms training and
inference data identically.
"""
from dataclasses import dataclass
import logging
import math
import struct

import numpy as np
from sklearn.decomposition import PCA
from sklearn.impute import SimpleImputer
from sklearn.preprocessing import KBinsDiscretizer, StandardScaler

from snnuq.errors import ContractError, ShapeError
from snnuq.numerics import DTYPE, as_matrix, as_vector

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class PreprocessConfig:
    """Settings of the input pipeline."""

    fill_value: float = -1.0
    quantize: bool = True
    decorrelate: bool = True
    min_bins: int = 16
    max_bins: int = 128
    pca_tolerance: float = 1e-8

    def __post_init__(self):
        if self.min_bins < 2 or self.max_bins < 2:
            raise ContractError("Bin counts must be at least 2.")
        if self.min_bins > self.max_bins:
            raise ContractError(
                "min_bins ({}) exceeds max_bins ({})."
                .format(self.min_bins, self.max_bins))
        if not 0.0 <= self.pca_tolerance < 1.0:
            raise ContractError("pca_tolerance must lie in [0, 1).")


@dataclass(frozen=True, eq=False)
class FittedPipeline:
    """
    Frozen preprocessing state shared by training and inference.

    ``discretizer`` is None when quantization is off and ``pca`` is None
    when decorrelation is off.
    """

    imputer: SimpleImputer
    discretizer: object
    scaler: StandardScaler
    pca: object
    target_mean: float
    target_scale: float

    @property
    def fill_value(self):
        return float(self.imputer.fill_value)

    @property
    def quantize(self):
        return self.discretizer is not None

    @property
    def decorrelate(self):
        return self.pca is not None

    @property
    def input_columns(self):
        """Number of raw feature columns the pipeline was fitted on."""
        return int(self.scaler.n_features_in_)

    @property
    def output_dim(self):
        """Number of features produced by ``transform_features``."""
        if self.pca is None:
            return self.input_columns
        return int(self.pca.n_components_)

    @property
    def bin_edges(self):
        if self.discretizer is None:
            return tuple(np.empty(0) for _ in range(self.input_columns))
        return tuple(self.discretizer.bin_edges_)

    @property
    def bin_counts(self):
        return [max(len(edges) - 1, 1) for edges in self.bin_edges]

    @property
    def feature_means(self):
        return self.scaler.mean_

    @property
    def feature_scales(self):
        return self.scaler.scale_

    @property
    def degenerate(self):
        """Columns whose zero variance made the scaler fall back to 1."""
        return np.sqrt(self.scaler.var_) != self.scaler.scale_

    @property
    def pca_basis(self):
        if self.pca is None:
            return np.eye(self.input_columns, dtype=DTYPE)
        return self.pca.components_

    @property
    def pca_mean(self):
        if self.pca is None:
            return np.zeros(self.input_columns, dtype=DTYPE)
        return self.pca.mean_

    def to_bytes(self):
        """
        Serialize the fitted estimator state into a little-endian blob.

        The encoding stores every float as IEEE-754 float64, so a round trip
        through ``from_bytes`` is bit-exact.
        """
        n_cols = self.input_columns
        n_comp = self.output_dim
        chunks = [struct.pack("<QQ??", n_cols, n_comp, self.quantize,
                              self.decorrelate),
                  struct.pack("<ddd", self.fill_value, self.target_mean,
                              self.target_scale)]
        if self.quantize:
            for edges in self.bin_edges:
                chunks.append(struct.pack("<Q", len(edges)))
                chunks.append(_f8(edges))
        chunks += [_f8(self.scaler.mean_), _f8(self.scaler.var_),
                   _f8(self.scaler.scale_)]
        if self.decorrelate:
            chunks += [_f8(self.pca.mean_), _f8(self.pca.components_),
                       _f8(self.pca.explained_variance_)]
        return b"".join(chunks)

    @classmethod
    def from_bytes(cls, blob):
        """
        Rebuild a pipeline written by ``to_bytes``.

        :param blob: Bytes produced by ``to_bytes``.
        :returns: An equivalent FittedPipeline.
        """
        reader = _BlobReader(blob)
        n_cols, n_comp, quantize, decorrelate = reader.unpack("<QQ??")
        fill_value, target_mean, target_scale = reader.unpack("<ddd")

        discretizer = None
        if quantize:
            bin_edges = []
            for _ in range(n_cols):
                count, = reader.unpack("<Q")
                bin_edges.append(reader.floats(count))
            discretizer = _restore(
                _discretizer(2), n_features_in_=n_cols,
                bin_edges_=_object_array(bin_edges),
                n_bins_=np.array([max(len(e) - 1, 1) for e in bin_edges]))

        scaler = _restore(StandardScaler(), n_features_in_=n_cols,
                          mean_=reader.floats(n_cols),
                          var_=reader.floats(n_cols),
                          scale_=reader.floats(n_cols))

        pca = None
        if decorrelate:
            pca = _restore(
                PCA(n_components=n_comp, svd_solver="full"),
                n_features_in_=n_cols, n_components_=n_comp,
                mean_=reader.floats(n_cols),
                components_=reader.floats(n_comp * n_cols)
                .reshape(n_comp, n_cols),
                explained_variance_=reader.floats(n_comp))
        reader.finish()

        return cls(imputer=_imputer(fill_value, n_cols),
                   discretizer=discretizer, scaler=scaler, pca=pca,
                   target_mean=target_mean, target_scale=target_scale)


class _BlobReader:
    """Sequential reader over a bytes object."""

    def __init__(self, blob):
        self._blob = memoryview(blob)
        self._offset = 0

    def take(self, size):
        end = self._offset + size
        if end > len(self._blob):
            raise ContractError("Pipeline blob is truncated.")
        chunk = bytes(self._blob[self._offset:end])
        self._offset = end
        return chunk

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def floats(self, count):
        return np.frombuffer(self.take(8 * count), dtype="<f8") \
            .astype(DTYPE)

    def finish(self):
        if self._offset != len(self._blob):
            raise ContractError("Pipeline blob has trailing bytes.")


def _f8(array):
    return np.asarray(array, dtype="<f8").tobytes()


def _object_array(arrays):
    out = np.empty(len(arrays), dtype=object)
    for index, array in enumerate(arrays):
        out[index] = array
    return out


def _restore(estimator, **fitted):
    """Load fitted attributes into an unfitted estimator."""
    for name, value in fitted.items():
        setattr(estimator, name, value)
    return estimator


def _imputer(fill_value, n_cols):
    # The constant strategy ignores the data it is fitted on.
    return SimpleImputer(strategy="constant", fill_value=fill_value) \
        .fit(np.zeros((1, n_cols), dtype=DTYPE))


def _discretizer(n_bins):
    return KBinsDiscretizer(n_bins=n_bins, encode="ordinal",
                            strategy="quantile", subsample=None)


def automatic_bin_count(column, config=PreprocessConfig()):
    """
    Choose the number of quantile bins for one column.

    bins = min(distinct values, max(min_bins, floor(cbrt(N)))), capped at
    max_bins. Only a constant column gets a single bin.

    :param column: Imputed (finite) column values.
    :param config: PreprocessConfig supplying min_bins and max_bins.
    """
    distinct = len(np.unique(column))
    # Guard the float cube root against 64 -> 3.9999...
    root = int(math.floor(round(len(column) ** (1.0 / 3.0), 9)))
    return max(1, min(distinct, max(config.min_bins, root), config.max_bins))


def quantile_edges(column, n_bins):
    """
    Compute the bin edges a quantile discretizer fits on one column.

    Edges sit at the i/k sample quantiles; edges closer than the
    discretizer's width tolerance are merged, so tied columns get fewer bins
    than requested. A constant column gets the single bin (-inf, inf).

    :param column: Finite column values.
    :param n_bins: Requested bin count k >= 2.
    :returns: Array of edges.
    """
    if n_bins < 2:
        raise ContractError("At least two bins must be requested.")
    column = np.asarray(column, dtype=DTYPE).reshape(-1, 1)
    return _discretizer(n_bins).fit(column).bin_edges_[0]


def fit_pipeline(x, y, cfg=PreprocessConfig()):
    """
    Fit the preprocessing pipeline on a training pool.

    :param x: Feature matrix (rows x columns); NaN marks missing values.
    :param y: Target vector aligned with the rows of x.
    :param cfg: A PreprocessConfig.
    :returns: A FittedPipeline.
    """
    x = as_matrix(x, name="features", allow_missing=True)
    y = as_vector(y, name="target")
    if x.shape[0] == 0 or x.shape[1] == 0:
        msg = "Cannot fit a pipeline on an empty feature matrix."
        LOGGER.error(msg)
        raise ContractError(msg)
    if len(y) != x.shape[0]:
        msg = "Target length {} does not match {} feature rows." \
              .format(len(y), x.shape[0])
        LOGGER.error(msg)
        raise ShapeError(msg)

    imputer = _imputer(cfg.fill_value, x.shape[1])
    values = imputer.transform(x)

    discretizer = None
    if cfg.quantize:
        # Constant columns collapse to one bin inside the discretizer.
        n_bins = [max(2, automatic_bin_count(values[:, j], cfg))
                  for j in range(x.shape[1])]
        discretizer = _discretizer(np.array(n_bins)).fit(values)
        values = discretizer.transform(values)

    scaler = StandardScaler().fit(values)
    degenerate = np.sqrt(scaler.var_) != scaler.scale_
    if degenerate.any():
        LOGGER.warning("Columns %s have zero variance after binning; their "
                       "scale is set to 1.",
                       np.flatnonzero(degenerate).tolist())

    pca = None
    kept = x.shape[1]
    if cfg.decorrelate:
        standardized = scaler.transform(values)
        pca = PCA(svd_solver="full").fit(standardized)
        kept = _retained_components(pca.explained_variance_,
                                    cfg.pca_tolerance)
        if kept < pca.n_components_:
            pca = PCA(n_components=kept, svd_solver="full").fit(standardized)
        kept = pca.n_components_
    LOGGER.info("Preprocessing keeps %d of %d feature directions.",
                kept, x.shape[1])

    target = StandardScaler().fit(y.reshape(-1, 1))
    if not target.var_[0] > 0.0:
        LOGGER.warning("Target has zero variance; its scale is set to 1.")

    return FittedPipeline(imputer=imputer, discretizer=discretizer,
                          scaler=scaler, pca=pca,
                          target_mean=float(target.mean_[0]),
                          target_scale=float(target.scale_[0]))


def _retained_components(explained, tolerance):
    """Count the directions whose variance exceeds tolerance * largest."""
    largest = explained[0] if len(explained) else 0.0
    if not largest > 0.0:
        return 1
    return max(1, int(np.sum(explained > tolerance * largest)))


def standardize_features(p, x):
    """
    Apply imputing, quantization and standardization (no rotation).

    :param p: A FittedPipeline.
    :param x: Feature matrix with the fitted column count.
    :returns: The standardized matrix.
    """
    x = as_matrix(x, name="features", allow_missing=True)
    if x.shape[1] != p.input_columns:
        msg = "Expected {} feature columns, got {}.".format(
            p.input_columns, x.shape[1])
        LOGGER.error(msg)
        raise ShapeError(msg)

    values = p.imputer.transform(x)
    if p.discretizer is not None:
        values = p.discretizer.transform(values)
    return p.scaler.transform(values)


def transform_features(p, x):
    """
    Transform raw features into network inputs.

    :param p: A FittedPipeline.
    :param x: Feature matrix with the fitted column count.
    :returns: A read-only matrix with ``p.output_dim`` columns.
    """
    out = standardize_features(p, x)
    if p.pca is not None:
        out = p.pca.transform(out)
    out = np.array(out, dtype=DTYPE)
    out.setflags(write=False)
    return out


def transform_target(p, y):
    """Standardize targets with the fitted mean and scale."""
    return (as_vector(y, name="target") - p.target_mean) / p.target_scale


def inverse_target(p, mu, sigma):
    """
    Map standardized predictions back to target units.

    :returns: A tuple ``(mu * scale + mean, sigma * scale)``.
    """
    mu = np.asarray(mu, dtype=DTYPE)
    sigma = np.asarray(sigma, dtype=DTYPE)
    return mu * p.target_scale + p.target_mean, sigma * p.target_scale


def coarse_classes(p, y, k=10):
    """
    Partition targets into k quantile classes.

    The partition is computed on standardized targets, which leaves the
    quantile order unchanged. When y has fewer than k distinct values, k is
    reduced to that count.

    :param p: A FittedPipeline supplying the target standardization.
    :param y: Target vector in original units.
    :param k: Requested class count, at least 2.
    :returns: Integer class ids 0 .. k' - 1.
    """
    if k < 2:
        raise ContractError("The class count must be at least 2.")
    z = transform_target(p, y)
    distinct = len(np.unique(z))
    k = min(k, distinct)
    if k < 2:
        return np.zeros(len(z), dtype=np.int64)

    edges = np.quantile(z, np.arange(1, k, dtype=DTYPE) / k)
    raw = np.searchsorted(edges, z, side="left")
    # Collapse ids left empty by tied edges.
    _, classes = np.unique(raw, return_inverse=True)
    return classes.astype(np.int64)
