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
"""A collection of more general utility functions."""

import coloredlogs
import logging
import os

import numpy as np

LOGGER = logging.getLogger(__name__)

_LEVELS = {
    1: logging.DEBUG,
    2: logging.INFO,
    3: logging.WARNING,
    4: logging.ERROR,
}
TRUE_STRINGS = frozenset(["true", "yes", "y", "on", "1"])
FALSE_STRINGS = frozenset(["false", "no", "n", "off", "0"])


def create_parentdir(path):
    """
    Recursively create a directory and its parents.

    :param path: Path to a directory to be created.
    """
    path = os.path.expanduser(path)
    if path and not os.path.exists(path):
        LOGGER.info("Directory does not exist. Creating directories to %s",
                    path)
        os.makedirs(path)


def ensure_parent_of(file_path):
    """
    Create the directory that will hold ``file_path`` if needed.

    :param file_path: Path to a file about to be written.
    """
    create_parentdir(os.path.dirname(os.path.abspath(file_path)))


def sibling_path(path, suffix, extension):
    """
    Build a path next to ``path`` that shares its stem.

    For example ``sibling_path("out/report.yaml", "_retention", ".csv")``
    returns ``out/report_retention.csv``.

    :param path: Reference file path.
    :param suffix: Text appended to the stem.
    :param extension: Extension (with leading dot) of the new path.
    """
    root, _ = os.path.splitext(path)
    return "{}{}{}".format(root, suffix, extension)


def parse_bool(value):
    """
    Interpret a textual boolean.

    :param value: A string such as ``true``, ``no`` or ``1``.
    :returns: The boolean value.
    """
    lowered = str(value).strip().lower()
    if lowered in TRUE_STRINGS:
        return True
    if lowered in FALSE_STRINGS:
        return False
    msg = "'{}' is not a recognized boolean value.".format(value)
    LOGGER.error(msg)
    raise ValueError(msg)


def derive_seeds(seed, count):
    """
    Derive independent integer seeds from a root seed.

    :param seed: Root seed of a run.
    :param count: Number of child seeds to produce.
    :returns: A list of ``count`` non-negative integers, stable per seed.
    """
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(child.generate_state(1, dtype=np.uint32)[0])
            for child in children]


class LoggerUtility:
    """Utility class for setting up logging consistently."""

    def __init__(self, logger):
        """
        Initialize a new LoggerUtility class instance.

        :param logger: An instance of a logger to configure.
        """
        self._logger = logger

    def configure(self, log_format, log_lvl=2, colors=True):
        """
        Configures the general logging facility.

        :param log_format: String containing the desired logging format.
        :param log_lvl: Integer level (1-5) to set the logger to.
        :param colors: Install colored console output.
        """
        level = self.map_level(log_lvl)
        logging.basicConfig(level=level, format=log_format)
        if colors:
            # Package-wide so that every module logger picks it up.
            coloredlogs.install(level=level, fmt=log_format,
                                logger=logging.getLogger("snnuq"))

    def add_file_handler(self, log_path, log_format, log_lvl=2):
        """
        Add a file handler to logging.

        :param log_path: String containing the file path to store logging.
        :param log_format: String containing the desired logging format.
        :param log_lvl: Integer level (1-5) to set the logger to.
        """
        ensure_parent_of(log_path)
        fh = logging.FileHandler(log_path)
        fh.setLevel(self.map_level(log_lvl))
        fh.setFormatter(logging.Formatter(log_format))
        logging.getLogger("snnuq").addHandler(fh)

    @staticmethod
    def map_level(log_lvl):
        """
        Map level 1-5 to their respective logging enumerations.

        :param log_lvl: Integer level (1-5) representing logging verbosity.
        """
        return _LEVELS.get(log_lvl, logging.CRITICAL)
