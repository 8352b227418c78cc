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
Model container files.

Layout (all integers little-endian)::

    magic        5 bytes   b"SNNE1"
    version      uint32
    body length  uint64
    body:
      manifest   uint64 length + UTF-8 text of "key = value" lines
      pipeline   uint64 length + FittedPipeline blob
      members    uint32 count, then per member uint64 length + blob
    digest       32 bytes  SHA-256 of the body

A member blob is the concatenation of every layer's weight matrix
(row-major) followed by its bias, as float64, in storage order.
"""
import hashlib
import io
import json
import logging
import struct

from filelock import FileLock, Timeout
import jsonschema
import numpy as np

from snnuq.abstracts.enums import ContainerErrorCode
from snnuq.configuration import KeyValueConfiguration
from snnuq.datastructures.core import (
    EnsembleModel,
    FittedPipeline,
    TrainConfig,
)
from snnuq.datastructures.core.snn import SnnModel
from snnuq.errors import ContainerError, SnnuqError
from snnuq.utils import ensure_parent_of

LOGGER = logging.getLogger(__name__)

MAGIC = b"SNNE1"
VERSION = 1
HEADER = struct.Struct("<5sIQ")
DIGEST_SIZE = hashlib.sha256().digest_size
TRAIN_PREFIX = "train."
JSON_TRAIN_KEYS = ("train.exclude_columns",)
LOCK_TIMEOUT = 30


def _fail(code, msg):
    LOGGER.error(msg)
    raise ContainerError(code, msg)


def _format_value(value):
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_manifest(ens):
    """
    Render the manifest text of an ensemble.

    :param ens: An EnsembleModel.
    :returns: The manifest as ``key = value`` lines.
    """
    spec = ens.members[0].spec
    lines = [
        ("format", MAGIC.decode("ascii")),
        ("version", VERSION),
        ("input_columns", ens.pipeline.input_columns),
        ("input_dim", spec.input_dim),
        ("member_count", len(ens)),
        ("member_seeds", ens.member_seeds),
        ("feature_columns", json.dumps(ens.feature_columns)),
        ("target_name", json.dumps(ens.target_name)),
        ("layer_shapes", ["{}x{}".format(*shape)
                          for shape in spec.layer_shapes()]),
        ("normalize_projection", spec.normalize_projection),
    ]
    for key, value in ens.config.as_mapping().items():
        key = TRAIN_PREFIX + key
        if key in JSON_TRAIN_KEYS:
            # Names may hold separators or comment marks.
            value = json.dumps(list(value))
        lines.append((key, value))
    return "".join("{} = {}\n".format(key, _format_value(value))
                   for key, value in lines)


def parse_manifest(text):
    """
    Parse manifest text.

    :returns: A tuple ``(fields, config)`` of the plain manifest fields and
        the echoed TrainConfig.
    """
    fields, train_lines, lists = {}, [], {}
    for line in text.splitlines():
        if not line.strip():
            continue
        if " = " not in line:
            _fail(ContainerErrorCode.BAD_MANIFEST,
                  "Malformed manifest line '{}'.".format(line))
        key, value = line.split(" = ", 1)
        if key in JSON_TRAIN_KEYS:
            lists[key[len(TRAIN_PREFIX):]] = value
        elif key.startswith(TRAIN_PREFIX):
            train_lines.append("{} = {}\n".format(key[len(TRAIN_PREFIX):],
                                                  value))
        else:
            fields[key] = value

    try:
        echo = KeyValueConfiguration.load_configuration_from_stream(
            io.StringIO("".join(train_lines)), "TRAIN")
        values = echo.as_dict()
        for key, value in lists.items():
            values[key] = json.loads(value)
            if not isinstance(values[key], list):
                raise ValueError("{} is not a JSON list.".format(key))
        config = TrainConfig.from_mapping(values)
    except (SnnuqError, ValueError, jsonschema.ValidationError) as e:
        _fail(ContainerErrorCode.BAD_MANIFEST,
              "Manifest configuration is invalid: {}".format(e))
    return fields, config


def _member_blob(model):
    return b"".join(np.asarray(p, dtype="<f8").tobytes()
                    for p in model.parameters())


def _member_from_blob(blob, spec):
    expected = sum(n_in * n_out + n_out
                   for n_in, n_out in spec.layer_shapes()) * 8
    if len(blob) != expected:
        _fail(ContainerErrorCode.BAD_MANIFEST,
              "Member blob has {} bytes, the manifest implies {}.".format(
                  len(blob), expected))

    values = np.frombuffer(blob, dtype="<f8").astype(np.float64)
    weights, biases, offset = [], [], 0
    for n_in, n_out in spec.layer_shapes():
        weights.append(values[offset:offset + n_in * n_out]
                       .reshape(n_in, n_out))
        offset += n_in * n_out
        biases.append(values[offset:offset + n_out])
        offset += n_out
    return SnnModel(spec, weights, biases)


def encode_container(ens):
    """Serialize an ensemble into container bytes."""
    chunks = []
    for blob in (render_manifest(ens).encode("utf-8"),
                 ens.pipeline.to_bytes()):
        chunks.append(struct.pack("<Q", len(blob)))
        chunks.append(blob)
    chunks.append(struct.pack("<I", len(ens)))
    for member in ens.members:
        blob = _member_blob(member)
        chunks.append(struct.pack("<Q", len(blob)))
        chunks.append(blob)

    body = b"".join(chunks)
    return HEADER.pack(MAGIC, VERSION, len(body)) + body + \
        hashlib.sha256(body).digest()


class _BodyReader:
    def __init__(self, body):
        self._body = body
        self._offset = 0

    def take(self, size):
        if self._offset + size > len(self._body):
            _fail(ContainerErrorCode.TRUNCATED,
                  "Container body ends before a declared section.")
        chunk = self._body[self._offset:self._offset + size]
        self._offset += size
        return chunk

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))[0]

    def section(self):
        return self.take(self.unpack("<Q"))


def decode_container(data):
    """
    Rebuild an ensemble from container bytes.

    :param data: Bytes produced by ``encode_container``.
    :returns: An EnsembleModel.
    """
    if data[:len(MAGIC)] != MAGIC:
        if len(data) < len(MAGIC) and MAGIC.startswith(data):
            _fail(ContainerErrorCode.TRUNCATED, "Container is truncated.")
        _fail(ContainerErrorCode.BAD_MAGIC,
              "Not a model container (bad magic bytes).")
    if len(data) < HEADER.size:
        _fail(ContainerErrorCode.TRUNCATED, "Container header is truncated.")

    _, version, body_length = HEADER.unpack_from(data)
    if version != VERSION:
        _fail(ContainerErrorCode.BAD_VERSION,
              "Container version {} is not supported (expected {})."
              .format(version, VERSION))

    end = HEADER.size + body_length
    if len(data) < end + DIGEST_SIZE:
        _fail(ContainerErrorCode.TRUNCATED,
              "Container holds {} bytes, its header declares {}.".format(
                  len(data), end + DIGEST_SIZE))
    body = data[HEADER.size:end]
    if hashlib.sha256(body).digest() != data[end:end + DIGEST_SIZE]:
        _fail(ContainerErrorCode.BAD_CHECKSUM,
              "Container checksum mismatch; the file is corrupted.")

    reader = _BodyReader(body)
    try:
        manifest = reader.section().decode("utf-8")
    except UnicodeDecodeError:
        _fail(ContainerErrorCode.BAD_MANIFEST, "Manifest is not UTF-8.")
    fields, config = parse_manifest(manifest)

    try:
        pipeline = FittedPipeline.from_bytes(reader.section())
        input_dim = int(fields["input_dim"])
        seeds = [int(s) for s in fields["member_seeds"].split(",")]
        columns = json.loads(fields["feature_columns"])
        target_name = json.loads(fields.get("target_name", "null"))
    except (KeyError, ValueError, SnnuqError) as e:
        _fail(ContainerErrorCode.BAD_MANIFEST,
              "Manifest or pipeline is invalid: {}".format(e))

    spec = config.snn_spec(input_dim)
    declared = fields.get("layer_shapes", "")
    if declared != _format_value(["{}x{}".format(*s)
                                  for s in spec.layer_shapes()]):
        _fail(ContainerErrorCode.BAD_MANIFEST,
              "Layer shapes '{}' do not match the configuration."
              .format(declared))

    count = reader.unpack("<I")
    if count != len(seeds):
        _fail(ContainerErrorCode.BAD_MANIFEST,
              "Container holds {} members but {} seeds.".format(
                  count, len(seeds)))
    members = [_member_from_blob(reader.section(), spec)
               for _ in range(count)]
    return EnsembleModel(members, pipeline, seeds, config, columns,
                         target_name=target_name)


def save_container(ens, path):
    """
    Write an ensemble to ``path`` while holding a file lock.

    :param ens: An EnsembleModel.
    :param path: Destination of the container file.
    """
    ensure_parent_of(path)
    data = encode_container(ens)
    lock = FileLock(path + ".lock")
    try:
        with lock.acquire(timeout=LOCK_TIMEOUT):
            with open(path, "wb") as out:
                out.write(data)
    except Timeout:
        msg = "Could not acquire the write lock for {}.".format(path)
        LOGGER.error(msg)
        raise SnnuqError(msg)
    LOGGER.info("Model with %d members written to %s (%d bytes).", len(ens),
                path, len(data))


def load_container(path):
    """Read an ensemble from a container file."""
    with open(path, "rb") as source:
        data = source.read()
    LOGGER.debug("Loading model container %s (%d bytes).", path, len(data))
    return decode_container(data)
