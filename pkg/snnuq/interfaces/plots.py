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
"""SVG figures for retention curves and the extrapolation demo."""
import logging

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from snnuq.utils import ensure_parent_of  # noqa: E402

LOGGER = logging.getLogger(__name__)

# Fixed ids and no timestamp keep the SVG output byte-identical across runs.
SVG_RC = {"svg.hashsalt": "snnuq", "svg.fonttype": "none"}
SVG_METADATA = {"Date": None}


def _save(fig, path):
    ensure_parent_of(path)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=SVG_METADATA)
    plt.close(fig)
    LOGGER.info("Figure written to %s", path)


def plot_retention_curves(curves, path, title="Error retention"):
    """
    Draw one or more retention curves into a single SVG.

    :param curves: Mapping of label to RetentionCurve.
    :param path: Destination of the SVG file.
    :param title: Figure title.
    """
    with matplotlib.rc_context(SVG_RC):
        fig, ax = plt.subplots(figsize=(6, 4.5))
        for label, curve in curves.items():
            ax.plot(curve.retention, curve.mse, linewidth=1.5,
                    label="{} (R-AUC {:.4f})".format(label, curve.area))
        ax.set_xlabel("Retention fraction")
        ax.set_ylabel("MSE")
        ax.set_xlim(0.0, 1.0)
        ax.set_title(title)
        ax.grid(True, alpha=0.3)
        ax.legend(loc="upper left", fontsize=9)
        _save(fig, path)


def plot_extrapolation(demo, path):
    """
    Draw the extrapolation demo: known data, new data and both regressors.

    :param demo: An ExtrapolationResult.
    :param path: Destination of the SVG file.
    """
    with matplotlib.rc_context(SVG_RC):
        fig, ax = plt.subplots(figsize=(7, 4.5))
        ax.scatter(demo.x_known, demo.y_known, s=8, color="tab:blue",
                   label="Training and initial testing")
        ax.scatter(demo.x_new, demo.y_new, s=8, color="tab:orange",
                   label="New data")
        ax.plot(demo.grid, demo.truth, color="black", linewidth=1.0,
                linestyle="--", label="Ground truth")
        ax.plot(demo.grid, demo.linear, color="tab:green", linewidth=1.5,
                label="Linear regression")
        ax.plot(demo.grid, demo.snn, color="tab:red", linewidth=1.5,
                label="Self-normalizing network")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.set_title("Extrapolation ({} ground truth)".format(
            demo.ground_truth))
        ax.grid(True, alpha=0.3)
        ax.legend(loc="upper left", fontsize=8)
        _save(fig, path)
