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
Deep ensembles of self-normalizing networks for tabular regression.

The package trains ensembles of deep self-normalizing networks with a
hierarchical multitask objective, predicts a Gaussian per row together with
its total-variance uncertainty, and evaluates the uncertainty with
error-retention curves. This module also hosts the console renderers for
evaluation reports.
"""
from abc import ABCMeta, abstractmethod
import inspect
from io import StringIO
import logging
from logging import NullHandler
import sys

from rich.console import Console
from rich.table import Table
from rich.theme import Theme

import six

import tabulate

LOGGER = logging.getLogger(__name__)
LOGGER.addHandler(NullHandler())

__version_info__ = ("0", "3", "0")
__version__ = '.'.join(__version_info__)


@six.add_metaclass(ABCMeta)
class BaseReportRenderer:
    def __init__(self, *args, **kwargs):
        self._report_data = {}
        self._title = ''
        self._theme_dict = {}

    @abstractmethod
    def layout(self, report_data, title=None):
        """Setup concrete report layout

        Args:
            report_data (dict): metrics table, one column per key
            title (str): optional title of the table
        """
        pass

    @abstractmethod
    def render(self, theme=None):
        pass

    @staticmethod
    def _check(report_data):
        if not isinstance(report_data, dict) or not report_data:
            raise ValueError("Report data required to layout a table")


class LegacyReportRenderer(BaseReportRenderer):
    """Tabulate based plain text table"""

    layout_type = "legacy"      # Defines name in factory/cli

    def layout(self, report_data, title=None):
        self._check(report_data)
        self._report_data = report_data

        table_str = tabulate.tabulate(self._report_data, headers="keys")
        header_chars = max([len(line) for line in table_str.split("\n")])
        header_format = "".ljust(header_chars, "=")

        self._report_table = header_format + "\n"
        if title:
            self._report_table += title + "\n"
            self._report_table += header_format + "\n"
        self._report_table += table_str + "\n"
        self._report_table += header_format + "\n"

    def render(self, theme=None):
        """Do the actual printing"""
        print(self._report_table)

    def render_to_str(self, theme=None, width=200):
        """Capture output to string"""
        return self._report_table


class FlatReportRenderer(BaseReportRenderer):
    """Rich table with one row per split"""

    layout_type = "flat"        # Defines name in factory/cli

    def __init__(self, *args, **kwargs):
        super(FlatReportRenderer, self).__init__(*args, **kwargs)

        # Setup default theme
        self._theme_dict = {
            "Split": "bold",
            "R-AUC MSE": "bold red",
            "col_style_1": "",
            "col_style_2": "blue",
        }

    def layout(self, report_data, title=None):
        self._check(report_data)
        self._report_data = report_data

        self._report_table = Table()
        if title:
            self._report_table.title = title

        cols = list(self._report_data.keys())
        for nominal_col_num, col in enumerate(cols):
            if col in self._theme_dict:
                col_style = col
            elif nominal_col_num % 2 == 0:
                col_style = 'col_style_1'
            else:
                col_style = 'col_style_2'
            self._report_table.add_column(col, style=col_style,
                                          overflow="fold")

        # Alternate dim rows to differentiate them better
        for row in range(len(self._report_data[cols[0]])):
            self._report_table.add_row(
                *['{}'.format(self._report_data[key][row]) for key in cols],
                style='dim' if row % 2 == 0 else 'none')

    def _console(self, theme, **kwargs):
        if theme:
            self._theme_dict.update(theme)
        return Console(theme=Theme(self._theme_dict), **kwargs)

    def render(self, theme=None):
        """Do the actual printing"""
        self._console(theme).print(self._report_table)

    def render_to_str(self, theme=None, width=200):
        """Capture output to string"""
        printer = self._console(theme, file=StringIO(), width=width)
        printer.print(self._report_table)
        return printer.file.getvalue()


def iter_report_renderers():
    """Finds all concrete report renderers in this module

    Yields:
        (name, class) pairs for all concrete implementations of
        BaseReportRenderer in the current module
    """
    def member_is_renderer(member):
        return (inspect.isclass(member) and member.__module__ == __name__
                and issubclass(member, BaseReportRenderer)
                and not inspect.isabstract(member))

    for member in inspect.getmembers(sys.modules[__name__],
                                     member_is_renderer):
        yield member


class ReportRendererFactory:
    """Factory for alternate console report rendering formats"""
    def __init__(self):
        self._layouts = {}
        for _, renderer in iter_report_renderers():
            self.register_layout(renderer.layout_type, renderer)

    def register_layout(self, layout, renderer):
        self._layouts[layout] = renderer

    def get_renderer(self, layout):
        """Instantiate the renderer registered under ``layout``."""
        renderer = self._layouts.get(layout)
        if not renderer:
            raise ValueError(layout)
        return renderer()

    def get_layouts(self):
        return sorted(self._layouts.keys())


report_renderer_factory = ReportRendererFactory()
