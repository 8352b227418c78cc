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
"""Package for providing enumerations shared across snnuq."""
from enum import Enum

__all__ = ("AuxKind", "ContainerErrorCode", "ExitCode", "MemberStatus",
           "SplitTag")


class ExitCode(Enum):
    OK = 0
    FAILURE = 1
    USAGE = 2


class ContainerErrorCode(Enum):
    """Failure kinds when reading a model container."""

    BAD_MAGIC = 10
    BAD_VERSION = 11
    BAD_CHECKSUM = 12
    TRUNCATED = 13
    BAD_MANIFEST = 14


class AuxKind(Enum):
    """Low-level task attached to the trunk of each network."""

    CONTRASTIVE = "contrastive"
    CROSSENTROPY = "crossentropy"
    NONE = "none"


class SplitTag(Enum):
    """Partition a dataset was drawn from."""

    TRAIN = "train"
    DEV_IN = "dev_in"
    DEV_OUT = "dev_out"
    EVAL_IN = "eval_in"
    EVAL_OUT = "eval_out"

    @property
    def is_shifted(self):
        return self in (SplitTag.DEV_OUT, SplitTag.EVAL_OUT)


class MemberStatus(Enum):
    """Outcome of training one ensemble member."""

    EARLY_STOPPED = 0   # Patience ran out
    MAX_EPOCHS = 1      # Ran the full epoch budget
    DIVERGED = 2        # Non-finite loss, member discarded
