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
"""Module containing all things needed for a key = value configuration."""

import json
import logging
import os

import jsonschema

from snnuq.abstracts import Configuration
from snnuq.errors import ConfigurationError
from snnuq.utils import parse_bool

logger = logging.getLogger(__name__)

SECTIONS = ("TRAIN", "SYNTHETIC")


def load_schemas():
    """
    Load the JSON schema sections shipped with the package.

    :returns: A dictionary mapping section names to JSON schemas.
    """
    dirpath = os.path.dirname(os.path.abspath(__file__))
    schema_path = os.path.join(dirpath, "schemas", "configuration.json")
    with open(schema_path, "r") as json_file:
        return json.load(json_file)


class KeyValueConfiguration(Configuration):
    """
    Class for loading and verifying a plain-text run configuration.

    The grammar is deliberately small so that configurations can be written
    by hand and diffed easily:

    1. One ``key = value`` assignment per line.
    2. ``#`` starts a comment, either on its own line or after a value.
    3. Blank lines are ignored; a key may appear only once.

    Raw values are converted according to the JSON schema type declared for
    their key (integer, number, boolean, string or a comma separated array)
    and the resulting mapping is validated against the schema section, which
    rejects unknown keys.
    """

    def __init__(self, section="TRAIN"):
        """
        Class representing a parsed configuration.

        :param section: Schema section this configuration is checked against.
        """
        if section not in SECTIONS:
            msg = "Unknown configuration section '{}'. Expected one of {}." \
                  .format(section, ", ".join(SECTIONS))
            logger.error(msg)
            raise ValueError(msg)

        self.path = ""
        self.section = section
        self.values = {}
        self._lines = {}

    @classmethod
    def load_configuration(cls, path, section="TRAIN"):
        """
        Load a configuration file.

        :param path: Path to a configuration file.
        :param section: Schema section the file must satisfy.
        :returns: A verified KeyValueConfiguration.
        """
        logger.info("Loading configuration -- path = %s", path)
        try:
            with open(path, "r") as data:
                configuration = cls.load_configuration_from_stream(
                    data, section)
        except Exception as e:
            logger.error("Could not load configuration %s: %s", path, e)
            raise

        configuration.path = path
        return configuration

    @classmethod
    def load_configuration_from_stream(cls, stream, section="TRAIN"):
        """
        Load a configuration from a text stream.

        :param stream: Raw text stream of key = value lines.
        :param section: Schema section the stream must satisfy.
        :returns: A verified KeyValueConfiguration.
        """
        configuration = cls(section)
        schema = load_schemas()[section]
        properties = schema.get("properties", {})

        for lineno, line in enumerate(stream, start=1):
            content = line.split("#", 1)[0].strip()
            if not content:
                continue

            if "=" not in content:
                raise ConfigurationError(
                    "Line {} is not a 'key = value' assignment: '{}'."
                    .format(lineno, content))

            key, raw = [item.strip() for item in content.split("=", 1)]
            if not key:
                raise ConfigurationError(
                    "Line {} has an empty key.".format(lineno))

            if key in configuration.values:
                raise ConfigurationError(
                    "Key '{}' on line {} was already set on line {}."
                    .format(key, lineno, configuration._lines[key]))

            configuration.values[key] = cls._convert(
                key, raw, properties.get(key, {}), lineno)
            configuration._lines[key] = lineno

        logger.debug("Configuration parsed -- %s", configuration.values)
        configuration.verify()
        return configuration

    @staticmethod
    def _convert(key, raw, prop, lineno):
        """Convert a raw string to the type the schema expects for key."""
        expected = prop.get("type", "string")
        try:
            if expected == "integer":
                return int(raw)
            if expected == "number":
                return float(raw)
            if expected == "boolean":
                return parse_bool(raw)
            if expected == "array":
                return [item.strip() for item in raw.split(",")
                        if item.strip()]
        except ValueError:
            raise ConfigurationError(
                "Value '{}' for key '{}' on line {} is not of type '{}'."
                .format(raw, key, lineno, expected))

        return raw

    def verify(self):
        """Verify the configuration against its schema section."""
        schema = load_schemas()[self.section]
        self.validate_schema(self.section.lower(), self.values, schema)
        logger.debug("Configuration %s - Verified. No apparent issues.",
                     self.path or "<stream>")

    def as_dict(self):
        return dict(self.values)

    @staticmethod
    def validate_schema(parent_key, instance, schema):
        """
        Given a parent key, an instance of a configuration, and a json schema
        for that section, validate the instance against the schema.
        """
        validator = jsonschema.Draft7Validator(schema)
        errors = sorted(validator.iter_errors(instance),
                        key=lambda err: list(err.path))
        for error in errors:
            path = ".".join(str(item) for item in error.path)
            if error.validator == "additionalProperties":
                known = set(schema.get("properties", {}))
                unrecognized = sorted(set(instance) - known)
                raise jsonschema.ValidationError(
                    "Unrecognized key '{0}' found in {1}."
                    .format(unrecognized[0], parent_key))

            elif error.validator == "type":
                raise jsonschema.ValidationError(
                    "In {0}, {1} must be of type '{2}'."
                    .format(parent_key, path, error.validator_value))

            elif error.validator == "enum":
                raise jsonschema.ValidationError(
                    "In {0}, {1} must be one of {2}; got '{3}'."
                    .format(parent_key, path,
                            ", ".join(error.validator_value),
                            error.instance))

            elif error.validator in ("minimum", "maximum",
                                     "exclusiveMinimum", "exclusiveMaximum"):
                raise jsonschema.ValidationError(
                    "In {0}, {1} = {2} violates {3} {4}."
                    .format(parent_key, path, error.instance,
                            error.validator, error.validator_value))

            elif error.validator == "uniqueItems":
                raise jsonschema.ValidationError(
                    "Non-unique entries in {0}.{1}.".format(parent_key, path))

            elif error.validator == "minLength":
                raise jsonschema.ValidationError(
                    "In {0}, empty string found as value for {1}."
                    .format(parent_key, path))

            else:
                raise ValueError("Validation error: " + error.message)
