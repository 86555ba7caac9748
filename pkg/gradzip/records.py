# Copyright 2026 gradzip developers.
# All Rights Reserved.
#
#    Licensed under the Apache License, Version 2.0 (the "License"); you may
#    not use this file except in compliance with the License. You may obtain
#    a copy of the License at
#
#         http://www.apache.org/licenses/LICENSE-2.0
#
#    Unless required by applicable law or agreed to in writing, software
#    distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
#    WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
#    License for the specific language governing permissions and limitations
#    under the License.

"""Gradient tensor files.

A GTF file is a concatenation of GTF1 records:

    magic "GTF1" | version u8 | label length u16 | UTF-8 label | epoch u64 |
    rank u8 | rank x dim u64 | float32 payload | CRC-32 of the record

A compressed gradient file is a concatenation of GCF1 frames, one per
record, each carrying the record metadata and its GCB1 blob:

    magic "GCF1" | version u8 | label length u16 | UTF-8 label | epoch u64 |
    rank u8 | rank x dim u64 | blob length u64 | CRC-32 of the frame so far |
    GCB1 blob

All integers are little-endian.
"""

import dataclasses
import logging
import math
import os
import struct
import zlib

import numpy as np

from gradzip import _utils
from gradzip.coders import blob as gcb
from gradzip import exc


LOG = logging.getLogger(__name__)

RECORD_MAGIC = b"GTF1"
FRAME_MAGIC = b"GCF1"
VERSION = 1

_U8 = struct.Struct("<B")
_U16 = struct.Struct("<H")
_U32 = struct.Struct("<I")
_U64 = struct.Struct("<Q")
_F32 = np.dtype("<f4")


@dataclasses.dataclass(frozen=True)
class GradientRecord(object):
    """One gradient tensor of one layer at one epoch.

    ``values`` is a read-only flat float32 array in row-major order.
    """

    layer_label: str
    epoch: int
    shape: tuple
    values: np.ndarray

    def __post_init__(self):
        shape = tuple(int(d) for d in self.shape)
        values = np.array(self.values, dtype=np.float32).ravel()
        if any(d < 0 for d in shape):
            raise exc.InputError("negative dimension in shape %r" % (shape,))
        if math.prod(shape) != values.size:
            raise exc.InputError("shape %r does not hold %d values"
                                 % (shape, values.size))
        finite = np.isfinite(values)
        if not np.all(finite):
            position = int(np.flatnonzero(~finite)[0])
            raise exc.InputError("non-finite value at position %d" % position,
                                 position=position)
        if self.epoch < 0:
            raise exc.InputError("epoch must be nonnegative")
        values.setflags(write=False)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_array(cls, layer_label, epoch, array):
        array = np.asarray(array, dtype=np.float32)
        return cls(layer_label, epoch, array.shape, array.ravel())

    def as_array(self):
        return self.values.reshape(self.shape)

    def __eq__(self, other):
        if not isinstance(other, GradientRecord):
            return NotImplemented
        return (self.layer_label == other.layer_label
                and self.epoch == other.epoch
                and self.shape == other.shape
                and self.values.tobytes() == other.values.tobytes())

    __hash__ = None


@dataclasses.dataclass(frozen=True)
class CompressedFrame(object):
    """Record metadata plus the GCB1 blob of its quantized values."""

    layer_label: str
    epoch: int
    shape: tuple
    blob: gcb.BitBlob


def _pack_metadata(magic, layer_label, epoch, shape):
    label = layer_label.encode("utf-8")
    if len(label) > 0xFFFF:
        raise exc.InputError("layer label is longer than 65535 bytes")
    if len(shape) > 0xFF:
        raise exc.InputError("rank %d is above 255" % len(shape))
    parts = [magic, _U8.pack(VERSION), _U16.pack(len(label)), label,
             _U64.pack(epoch), _U8.pack(len(shape))]
    parts.extend(_U64.pack(d) for d in shape)
    return b"".join(parts)


def encode_record(record):
    data = _pack_metadata(RECORD_MAGIC, record.layer_label, record.epoch,
                          record.shape)
    data += record.values.astype(_F32).tobytes()
    return data + _U32.pack(zlib.crc32(data))


def encode_frame(frame):
    blob = frame.blob.to_bytes()
    data = _pack_metadata(FRAME_MAGIC, frame.layer_label, frame.epoch,
                          frame.shape)
    data += _U64.pack(len(blob))
    return data + _U32.pack(zlib.crc32(data)) + blob


class _Reader(object):
    """Sequential reader that keeps track of the byte offset."""

    def __init__(self, stream, size):
        self.stream = stream
        self.size = size
        self.offset = 0
        self.consumed = bytearray()

    @property
    def remaining(self):
        return self.size - self.offset

    def read(self, n, what):
        if n > self.remaining:
            raise exc.FormatError("truncated %s: need %d bytes, %d left"
                                  % (what, n, self.remaining),
                                  offset=self.offset)
        data = self.stream.read(n)
        if len(data) != n:
            raise exc.FormatError("truncated %s" % what, offset=self.offset)
        self.offset += n
        self.consumed += data
        return data

    def unpack(self, fmt, what):
        return fmt.unpack(self.read(fmt.size, what))[0]

    def start(self):
        self.consumed = bytearray()
        return self.offset


def _read_metadata(reader, magic):
    start = reader.start()
    found = reader.read(4, "magic")
    if found != magic:
        raise exc.FormatError("bad magic %r, expected %r" % (found, magic),
                              offset=start)
    version = reader.unpack(_U8, "version")
    if version != VERSION:
        raise exc.FormatError("unsupported version %d" % version,
                              offset=start + 4)
    label_length = reader.unpack(_U16, "label length")
    label_offset = reader.offset
    try:
        label = reader.read(label_length, "label").decode("utf-8")
    except UnicodeDecodeError:
        raise exc.FormatError("label is not valid UTF-8",
                              offset=label_offset)
    epoch = reader.unpack(_U64, "epoch")
    rank = reader.unpack(_U8, "rank")
    shape = tuple(reader.unpack(_U64, "dimension") for _ in range(rank))
    return start, label, epoch, shape


def _check_crc(reader, start):
    body = bytes(reader.consumed)
    crc_offset = reader.offset
    crc = reader.unpack(_U32, "CRC-32")
    if zlib.crc32(body) != crc:
        raise exc.FormatError("CRC-32 mismatch in entry at byte %d" % start,
                              offset=crc_offset)


def _read_record(reader):
    start, label, epoch, shape = _read_metadata(reader, RECORD_MAGIC)
    count = math.prod(shape)
    if count * _F32.itemsize > reader.remaining:
        raise exc.FormatError("shape %r needs %d payload bytes, only %d left"
                              % (shape, count * _F32.itemsize,
                                 reader.remaining), offset=reader.offset)
    payload_offset = reader.offset
    payload = reader.read(count * _F32.itemsize, "payload")
    _check_crc(reader, start)
    values = np.frombuffer(payload, dtype=_F32) if count else np.zeros(
        0, dtype=np.float32)
    finite = np.isfinite(values)
    if not np.all(finite):
        position = int(np.flatnonzero(~finite)[0])
        raise exc.FormatError("non-finite value in payload",
                              offset=payload_offset + 4 * position)
    return GradientRecord(label, epoch, shape, values)


def _read_frame(reader):
    start, label, epoch, shape = _read_metadata(reader, FRAME_MAGIC)
    length = reader.unpack(_U64, "blob length")
    _check_crc(reader, start)
    if length > reader.remaining:
        raise exc.FormatError("blob of %d bytes, only %d left"
                              % (length, reader.remaining),
                              offset=reader.offset)
    blob_offset = reader.offset
    try:
        blob = gcb.BitBlob.from_bytes(reader.read(length, "blob"))
    except exc.FormatError as e:
        raise exc.FormatError("invalid blob: %s" % e, offset=blob_offset)
    if blob.header.symbol_count != math.prod(shape):
        raise exc.FormatError("blob holds %d symbols, shape %r needs %d"
                              % (blob.header.symbol_count, shape,
                                 math.prod(shape)), offset=blob_offset)
    return CompressedFrame(label, epoch, shape, blob)


def _iter_file(path, read_one):
    size = os.path.getsize(path)
    with open(path, "rb") as stream:
        reader = _Reader(stream, size)
        while reader.remaining:
            yield read_one(reader)


def iter_records(path):
    """Stream the records of a GTF file one at a time.

    :raises FormatError: naming the byte offset of the first problem
    """
    return _iter_file(path, _read_record)


def read_record(path):
    """Return the first record of a GTF file."""
    for record in iter_records(path):
        return record
    raise exc.FormatError("file %s holds no record" % path, offset=0)


def read_records(path):
    return list(iter_records(path))


def write_records(path, records):
    """Atomically replace ``path`` with the given records."""
    data = b"".join(encode_record(r) for r in records)
    _utils.atomic_write(path, data)
    LOG.debug("Wrote %d bytes of records to %s", len(data), path)


def write_record(path, record):
    write_records(path, [record])


def iter_frames(path):
    return _iter_file(path, _read_frame)


def write_frames(path, frames):
    data = b"".join(encode_frame(f) for f in frames)
    _utils.atomic_write(path, data)
    LOG.debug("Wrote %d bytes of compressed frames to %s", len(data), path)
