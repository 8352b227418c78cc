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
"""Abstract API for loading and verifying run configurations."""
from abc import ABCMeta, abstractmethod
import six


@six.add_metaclass(ABCMeta)
class Configuration:
    """
    Abstract class for loading and verifying a run configuration.

    A configuration is a flat mapping of keys to typed values. Concrete
    loaders decide on the file grammar; every loader validates the mapping
    against a named schema section before handing it out.
    """

    @classmethod
    @abstractmethod
    def load_configuration(cls, path, section):
        """
        Method for loading a configuration from a file.

        :param path: Path to a configuration file.
        :param section: Name of the schema section the file must satisfy.
        :returns: A configuration object containing the information loaded
                  from path.
        """

    @classmethod
    @abstractmethod
    def load_configuration_from_stream(cls, stream, section):
        """
        Method for loading a configuration from a stream.

        :param stream: Raw text stream containing configuration data.
        :param section: Name of the schema section the stream must satisfy.
        :returns: A configuration object containing the information in
                  stream.
        """

    @abstractmethod
    def verify(self):
        """
        Verify the whole configuration.
        """

    @abstractmethod
    def as_dict(self):
        """
        Return the verified, typed key/value mapping.

        :returns: A dictionary keyed by configuration key.
        """
