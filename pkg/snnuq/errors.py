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
"""Exceptions raised by the snnuq package."""

from snnuq.abstracts.enums import ContainerErrorCode


class SnnuqError(Exception):
    """Base class for every error raised on purpose by snnuq."""

    def describe(self):
        """
        Render the error as a single machine parsable line.

        :returns: A string of the form ``<ClassName>: <message>``.
        """
        return "{}: {}".format(type(self).__name__, self)


class ShapeError(SnnuqError, ValueError):
    """An operand does not have the dimensions an operation requires."""


class ContractError(SnnuqError, ValueError):
    """A precondition of an operation was violated by its caller."""


class ConfigurationError(SnnuqError, ValueError):
    """A configuration file does not follow the key = value grammar."""


class DataFormatError(SnnuqError, ValueError):
    """A CSV cell or header could not be interpreted."""

    def __init__(self, message, row=None, column=None):
        """
        Initialize a DataFormatError.

        :param message: Description of the problem.
        :param row: 1-based line number in the file (header is line 1).
        :param column: Name of the offending column.
        """
        if row is not None or column is not None:
            message = "{} (row {}, column '{}')".format(message, row, column)
        super(DataFormatError, self).__init__(message)
        self.row = row
        self.column = column


class ContainerError(SnnuqError):
    """A model container could not be read or validated."""

    def __init__(self, code, message):
        """
        Initialize a ContainerError.

        :param code: A ContainerErrorCode naming the failure kind.
        :param message: Description of the problem.
        """
        super(ContainerError, self).__init__(message)
        self.code = ContainerErrorCode(code)

    def describe(self):
        return "{}[{}]: {}".format(type(self).__name__, self.code.name, self)


class MemberDivergedError(SnnuqError):
    """The training loss of one ensemble member became non-finite."""

    def __init__(self, member, epoch, step, value, history=None):
        super(MemberDivergedError, self).__init__(
            "Member {} produced a non-finite loss ({}) at epoch {}, step {}."
            .format(member, value, epoch, step))
        self.member = member
        self.epoch = epoch
        self.step = step
        self.history = history


class TrainingError(SnnuqError, RuntimeError):
    """Ensemble training could not produce a usable model."""
