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

"""GCB1 compressed-blob wire format.

    offset  size  field
    0       4     magic "GCB1"
    4       1     format version
    5       1     model tag (see pmf.ModelTag)
    6       24    mu, alpha, beta as little-endian doubles, zero if unused
    30      4     grid descriptor: sign, exponent, mantissa bits and bias
    34      8     symbol count, little-endian
    42      8     payload bit length, little-endian
    50      n     canonical code lengths, one byte per bin (empirical only)
    50+n    m     payload, ceil(bit length / 8) bytes, LSB-first bit order
    50+n+m  4     CRC-32 of every preceding byte, little-endian
"""

import dataclasses
import struct
import zlib

import numpy as np

from gradzip.coders import pmf
from gradzip import exc
from gradzip import gennorm
from gradzip import quantizer


MAGIC = b"GCB1"
VERSION = 1

_HEADER = struct.Struct("<4sBB3d4sQQ")
_CRC = struct.Struct("<I")


@dataclasses.dataclass(frozen=True)
class BlobHeader(object):
    format: quantizer.Fp8Format
    model: pmf.ModelTag
    params: gennorm.GenNormParams = None
    symbol_count: int = 0

    @property
    def grid(self):
        return quantizer.build_grid(self.format)


class BitBlob(object):
    """Packed bit sequence and the header needed to decode it alone."""

    def __init__(self, payload, bit_length, header, code_lengths=None):
        payload = bytes(payload)
        if len(payload) != (bit_length + 7) // 8:
            raise exc.CorruptionError(
                "payload of %d bytes can not hold %d bits"
                % (len(payload), bit_length))
        self.payload = payload
        self.bit_length = bit_length
        self.header = header
        self.code_lengths = (None if code_lengths is None
                             else tuple(int(n) for n in code_lengths))

    @classmethod
    def from_bits(cls, bits, header, code_lengths=None):
        """Pack a 0/1 array, first bit into the lowest bit of byte 0."""
        bits = np.asarray(bits, dtype=np.uint8)
        payload = np.packbits(bits, bitorder="little").tobytes()
        return cls(payload, int(bits.size), header, code_lengths)

    def bits(self):
        if not self.bit_length:
            return np.zeros(0, dtype=np.uint8)
        data = np.frombuffer(self.payload, dtype=np.uint8)
        return np.unpackbits(data, count=self.bit_length, bitorder="little")

    @property
    def header_bits(self):
        """Everything on the wire that is not payload bits."""
        return len(self.to_bytes()) * 8 - self.bit_length

    def to_bytes(self):
        params = self.header.params
        values = params.as_tuple() if params is not None else (0.0, 0.0, 0.0)
        data = bytearray(_HEADER.pack(
            MAGIC, VERSION, int(self.header.model), *values,
            self.header.format.descriptor, self.header.symbol_count,
            self.bit_length))
        if self.header.model == pmf.ModelTag.EMPIRICAL:
            data += bytes(self.code_lengths)
        data += self.payload
        data += _CRC.pack(zlib.crc32(bytes(data)))
        return bytes(data)

    @classmethod
    def from_bytes(cls, data):
        """Parse and verify one GCB1 blob.

        :raises FormatError: not a GCB1 blob of a known version
        :raises CorruptionError: CRC mismatch or inconsistent lengths
        """
        data = bytes(data)
        if len(data) < _HEADER.size + _CRC.size:
            raise exc.FormatError("blob is truncated", offset=len(data))
        if data[:4] != MAGIC:
            raise exc.FormatError("bad magic %r" % data[:4], offset=0)
        body, (crc,) = data[:-_CRC.size], _CRC.unpack(data[-_CRC.size:])
        if zlib.crc32(body) != crc:
            raise exc.CorruptionError("CRC-32 mismatch",
                                      offset=len(body), unit="byte")
        (_magic, version, tag, mu, alpha, beta, descriptor, count,
         bit_length) = _HEADER.unpack_from(body)
        if version != VERSION:
            raise exc.FormatError("unsupported blob version %d" % version,
                                  offset=4)
        try:
            model = pmf.ModelTag(tag)
        except ValueError:
            raise exc.FormatError("unknown model tag %d" % tag, offset=5)
        try:
            fmt = quantizer.Fp8Format.from_descriptor(descriptor)
        except exc.ParameterError as e:
            raise exc.FormatError("bad grid descriptor: %s" % e, offset=30)

        params = None
        if model in (pmf.ModelTag.GENNORM, pmf.ModelTag.NORM):
            try:
                params = gennorm.GenNormParams(mu, alpha, beta)
            except exc.ParameterError as e:
                raise exc.FormatError("bad model parameters: %s" % e,
                                      offset=6)

        offset = _HEADER.size
        code_lengths = None
        if model == pmf.ModelTag.EMPIRICAL:
            size = quantizer.build_grid(fmt).size
            code_lengths = body[offset:offset + size]
            if len(code_lengths) != size:
                raise exc.CorruptionError("code length table is truncated",
                                          offset=len(body), unit="byte")
            offset += size
        payload = body[offset:]
        if len(payload) != (bit_length + 7) // 8:
            raise exc.CorruptionError(
                "payload holds %d bytes, header announces %d bits"
                % (len(payload), bit_length), offset=offset, unit="byte")
        header = BlobHeader(fmt, model, params, count)
        return cls(payload, bit_length, header, code_lengths)

    def __eq__(self, other):
        if not isinstance(other, BitBlob):
            return NotImplemented
        return self.to_bytes() == other.to_bytes()

    __hash__ = None

    def __repr__(self):
        return ("<BitBlob %s: %d symbols in %d bits>"
                % (self.header.model.name, self.header.symbol_count,
                   self.bit_length))
