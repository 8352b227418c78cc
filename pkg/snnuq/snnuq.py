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
"""Command line interface for training and evaluating SNN ensembles."""
from argparse import ArgumentParser, RawTextHelpFormatter
import logging
import os
import sys

import jsonschema

from snnuq import __version__, report_renderer_factory
from snnuq.abstracts.enums import ExitCode, SplitTag
from snnuq.configuration import KeyValueConfiguration
from snnuq.datastructures.core import (
    TrainConfig,
    evaluate_splits,
    predict_arrays,
    train_ensemble,
)
from snnuq.datastructures.core.retention import RetentionCurve
from snnuq.errors import SnnuqError
from snnuq.interfaces import (
    SyntheticSpec,
    gen_synthetic,
    load_container,
    load_csv,
    save_container,
    write_dataset,
    write_predictions,
)
from snnuq.interfaces.extrapolation import (
    GROUND_TRUTHS,
    demo_extrapolation,
)
from snnuq.interfaces.plots import plot_extrapolation, plot_retention_curves
from snnuq.utils import LoggerUtility, create_parentdir, sibling_path

# Program Globals
LOGGER = logging.getLogger(__name__)
LOG_UTIL = LoggerUtility(LOGGER)

# Configuration globals
DEBUG_FORMAT = "[%(asctime)s: %(levelname)s] " \
               "[%(module)s: %(lineno)d] %(message)s"
LFORMAT = "[%(asctime)s: %(levelname)s] %(message)s"
PROG = "snnuq"


def _train_config(path):
    if not path:
        return TrainConfig()
    config = KeyValueConfiguration.load_configuration(path, "TRAIN")
    return TrainConfig.from_mapping(config.as_dict())


def _model_columns(ens):
    return ens.feature_columns or None


def train_model(args):
    """Train an ensemble on a CSV file and write the model container."""
    cfg = _train_config(args.config)
    data = load_csv(args.data, args.target, cfg.exclude_columns)
    LOGGER.info("Loaded %d rows with %d features from %s.", len(data),
                len(data.columns), args.data)

    ens = train_ensemble(data.features, data.target, cfg, data.columns,
                         data.target_name)
    save_container(ens, args.out)
    for history in ens.histories:
        LOGGER.info("Member %d: best epoch %d of %d, validation NLL %.6f "
                    "(%s).", history.member, history.best_epoch,
                    history.epochs_run, history.best_nll,
                    history.status.name.lower())
    return ExitCode.OK.value


def predict_model(args):
    """Predict a Gaussian and an uncertainty score for every CSV row."""
    ens = load_container(args.model)
    data = load_csv(args.data, feature_columns=_model_columns(ens),
                    exclude_columns=ens.config.exclude_columns)
    batch = predict_arrays(ens, data.features)
    write_predictions(batch, args.out, decompose=args.decompose)
    LOGGER.info("Wrote %d predictions to %s.", len(data), args.out)
    return ExitCode.OK.value


def evaluate_model(args):
    """Score a model on an in-distribution and a shifted CSV file."""
    ens = load_container(args.model)
    target = args.target or ens.target_name
    if not target:
        raise SnnuqError("The model does not record its target column; pass "
                         "--target.")

    datasets = [
        load_csv(path, target, ens.config.exclude_columns, tag,
                 _model_columns(ens))
        for path, tag in ((args.in_path, SplitTag.DEV_IN),
                          (args.out_shifted, SplitTag.DEV_OUT))
        if path
    ]
    report = evaluate_splits(ens, datasets)
    report.to_yaml(args.report)
    report.pooled_curve.to_csv(sibling_path(args.report, "_retention",
                                            ".csv"))
    plot_retention_curves(report.curves,
                          sibling_path(args.report, "_retention", ".svg"))

    renderer = report_renderer_factory.get_renderer(args.layout)
    renderer.layout(report_data=report.table(),
                    title="{} ({} members)".format(
                        os.path.basename(args.model), len(ens)))
    renderer.render()
    return ExitCode.OK.value


def generate_data(args):
    """Write a synthetic train/dev_in/dev_out benchmark as CSV files."""
    values = {}
    if args.spec:
        values = KeyValueConfiguration.load_configuration(
            args.spec, "SYNTHETIC").as_dict()
    if args.seed is not None:
        values["seed"] = args.seed
    spec = SyntheticSpec.from_mapping(values)

    create_parentdir(args.out_dir)
    for dataset in gen_synthetic(spec):
        path = os.path.join(args.out_dir,
                            "{}.csv".format(dataset.split_tag.value))
        write_dataset(dataset, path)
        LOGGER.info("Wrote %d rows to %s.", len(dataset), path)
    return ExitCode.OK.value


def run_extrapolation(args):
    """Compare linear regression and a small SNN outside the training range."""
    result = demo_extrapolation(args.seed, args.ground_truth)
    create_parentdir(args.out_dir)
    stem = os.path.join(args.out_dir, "extrapolation")
    result.to_yaml(stem + ".yaml")
    plot_extrapolation(result, stem + ".svg")
    for name, scores in result.scores.items():
        print("{}: in_mse={:.6f} out_mse={:.6f}".format(
            name, scores["in_mse"], scores["out_mse"]))
    return ExitCode.OK.value


def plot_retention(args):
    """Render retention curve CSV files into one SVG."""
    labels = args.labels or [os.path.splitext(os.path.basename(p))[0]
                             for p in args.curves]
    if len(labels) != len(args.curves):
        raise SnnuqError("Got {} labels for {} curves.".format(
            len(labels), len(args.curves)))
    curves = {label: RetentionCurve.from_csv(path)
              for label, path in zip(labels, args.curves)}
    plot_retention_curves(curves, args.out, title=args.title)
    return ExitCode.OK.value


class UsageArgumentParser(ArgumentParser):
    """ArgumentParser whose usage errors exit with ExitCode.USAGE."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(ExitCode.USAGE.value,
                  "{}: error: {}\n".format(self.prog, message))


def setup_argparser():
    """Set up the program's argument parser."""
    parser = UsageArgumentParser(
        prog=PROG,
        description="Deep ensembles of self-normalizing networks for "
        "tabular regression with uncertainty.",
        formatter_class=RawTextHelpFormatter)
    subparsers = parser.add_subparsers(dest='subparser')
    subparsers.required = True

    # subparser for a train subcommand
    train = subparsers.add_parser(
        'train', help="Train an ensemble on a CSV file.")
    train.add_argument("--data", type=str, required=True,
                       help="CSV file with a header row.")
    train.add_argument("--target", type=str, required=True,
                       help="Name of the target column.")
    train.add_argument("--config", type=str,
                       help="Training configuration (key = value lines). "
                       "Defaults apply when omitted.")
    train.add_argument("--out", type=str, required=True,
                       help="Path of the model container to write.")
    train.set_defaults(func=train_model)

    # subparser for a predict subcommand
    predict = subparsers.add_parser(
        'predict', help="Predict mu, sigma and uncertainty per row.")
    predict.add_argument("--model", type=str, required=True,
                         help="Model container written by 'train'.")
    predict.add_argument("--data", type=str, required=True,
                         help="CSV file holding the model's feature columns.")
    predict.add_argument("--out", type=str, required=True,
                         help="Destination of the prediction CSV.")
    predict.add_argument("--decompose", action="store_true", default=False,
                         help="Add aleatoric and epistemic columns. "
                         "[Default: %(default)s]")
    predict.set_defaults(func=predict_model)

    # subparser for an evaluate subcommand
    evaluate = subparsers.add_parser(
        'evaluate', help="Compute R-AUC MSE on in-distribution and shifted "
        "data.")
    evaluate.add_argument("--model", type=str, required=True,
                          help="Model container written by 'train'.")
    evaluate.add_argument("--in", dest="in_path", type=str, required=True,
                          help="In-distribution CSV with targets.")
    evaluate.add_argument("--out-shifted", type=str,
                          help="Shifted CSV with targets.")
    evaluate.add_argument("--report", type=str, required=True,
                          help="Destination of the YAML report; the pooled "
                          "retention CSV and SVG are written next to it.")
    evaluate.add_argument("--target", type=str,
                          help="Target column. [Default: the training "
                          "target]")
    evaluate.add_argument(
        "--layout", type=str, choices=report_renderer_factory.get_layouts(),
        default='flat',
        help="Alternate report table layouts. [Default: %(default)s]")
    evaluate.set_defaults(func=evaluate_model)

    # subparser for a gen-data subcommand
    gen = subparsers.add_parser(
        'gen-data', help="Generate a synthetic shifted benchmark.")
    gen.add_argument("--spec", type=str,
                     help="Synthetic data settings (key = value lines).")
    gen.add_argument("--seed", type=int,
                     help="Override the seed of the settings.")
    gen.add_argument("--out-dir", type=str, required=True,
                     help="Directory receiving train/dev_in/dev_out CSVs.")
    gen.set_defaults(func=generate_data)

    # subparser for a demo-extrapolation subcommand
    demo = subparsers.add_parser(
        'demo-extrapolation',
        help="Compare linear regression and an SNN beyond the training "
        "range.")
    demo.add_argument("--seed", type=int, default=0,
                      help="Seed of the demo. [Default: %(default)d]")
    demo.add_argument("--ground-truth", type=str, default="cubic",
                      choices=sorted(GROUND_TRUTHS),
                      help="Ground truth function. [Default: %(default)s]")
    demo.add_argument("--out-dir", type=str, required=True,
                      help="Directory receiving the report and the plot.")
    demo.set_defaults(func=run_extrapolation)

    # subparser for a plot-retention subcommand
    plot = subparsers.add_parser(
        'plot-retention', help="Plot retention curve CSV files.")
    plot.add_argument("curves", type=str, nargs="+",
                      help="Retention CSV files (retention,mse).")
    plot.add_argument("--labels", type=str, nargs="+",
                      help="Legend labels, one per curve. [Default: file "
                      "names]")
    plot.add_argument("--title", type=str, default="Error retention",
                      help="Figure title. [Default: %(default)s]")
    plot.add_argument("--out", type=str, required=True,
                      help="Destination SVG file.")
    plot.set_defaults(func=plot_retention)

    # global options
    parser.add_argument(
        "-l", "--logpath", type=str,
        help="Alternate path to store program logging.")
    parser.add_argument(
        "-d", "--debug_lvl", type=int, default=2,
        help="Level of logging messages to be output:\n"
        "5 - Critical\n"
        "4 - Error\n"
        "3 - Warning\n"
        "2 - Info (Default)\n"
        "1 - Debug")
    parser.add_argument(
        "-v", "--version", action="version", version='%(prog)s ' + __version__)

    return parser


def _one_line(text):
    return " ".join(str(text).split())


def main(argv=None):
    """
    Execute the main program's functionality.

    Every failure is reported as a single ``snnuq: error: ...`` line on
    stderr with exit code 1; usage errors exit with code 2.

    :param argv: Argument list; defaults to ``sys.argv[1:]``.
    :returns: The exit code.
    """
    parser = setup_argparser()
    args = parser.parse_args(argv)

    lformat = DEBUG_FORMAT if args.debug_lvl == 1 else LFORMAT
    LOG_UTIL.configure(lformat, args.debug_lvl)
    if args.logpath:
        LOG_UTIL.add_file_handler(args.logpath, lformat, args.debug_lvl)

    try:
        return args.func(args)
    except SnnuqError as e:
        detail = e.describe()
    except jsonschema.ValidationError as e:
        detail = "ValidationError: {}".format(e.message)
    except (OSError, ValueError) as e:
        detail = "{}: {}".format(type(e).__name__, e)

    sys.stderr.write("{}: error: {}\n".format(PROG, _one_line(detail)))
    return ExitCode.FAILURE.value


def console():
    """Console script entry point."""
    sys.exit(main())


if __name__ == "__main__":
    console()
