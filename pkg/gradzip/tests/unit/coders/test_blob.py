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

import struct
import zlib

import ddt
import numpy as np

from gradzip.coders import blob as gcb
from gradzip.coders import huffman
from gradzip.coders import pmf
from gradzip import exc
from gradzip import gennorm
from gradzip import quantizer
from gradzip.tests import test


def _recrc(data):
    body = bytes(data[:-4])
    return body + struct.pack("<I", zlib.crc32(body))


@ddt.ddt
class BitBlobTestCase(test.TestCase):

    def setUp(self):
        super(BitBlobTestCase, self).setUp()
        self.grid = quantizer.build_grid(quantizer.DEFAULT_FORMAT)
        self.params = gennorm.GenNormParams(0.001, 0.5, 1.3)
        self.header = gcb.BlobHeader(self.grid.format, pmf.ModelTag.GENNORM,
                                     self.params, 3)

    def test_from_bits_packs_lsb_first(self):
        blob = gcb.BitBlob.from_bits([1, 0, 0, 0, 0, 0, 0, 0, 1, 1],
                                     self.header)
        self.assertEqual(b"\x01\x03", blob.payload)
        self.assertEqual(10, blob.bit_length)
        self.assertEqual([1, 0, 0, 0, 0, 0, 0, 0, 1, 1],
                         blob.bits().tolist())

    def test_layout(self):
        blob = gcb.BitBlob.from_bits([1, 1, 0], self.header)
        data = blob.to_bytes()
        self.assertEqual(50 + 1 + 4, len(data))
        self.assertEqual(b"GCB1", data[:4])
        self.assertEqual(gcb.VERSION, data[4])
        self.assertEqual(int(pmf.ModelTag.GENNORM), data[5])
        self.assertEqual(self.params.as_tuple(),
                         struct.unpack("<3d", data[6:30]))
        self.assertEqual(b"\x01\x05\x02\x11", data[30:34])
        self.assertEqual((3, 3), struct.unpack("<QQ", data[34:50]))
        self.assertEqual(b"\x03", data[50:51])
        self.assertEqual(zlib.crc32(data[:-4]),
                         struct.unpack("<I", data[-4:])[0])

    def test_header_bits(self):
        blob = gcb.BitBlob.from_bits([1] * 16, self.header)
        self.assertEqual(432, blob.header_bits)

    def test_round_trip(self):
        blob = gcb.BitBlob.from_bits([1, 0, 1, 1, 0], self.header)
        received = gcb.BitBlob.from_bytes(blob.to_bytes())
        self.assertEqual(blob, received)
        self.assertEqual(self.header, received.header)
        self.assertIsNone(received.code_lengths)

    def test_empirical_table(self):
        header = gcb.BlobHeader(self.grid.format, pmf.ModelTag.EMPIRICAL,
                                None, 0)
        lengths = [8] * self.grid.size
        blob = gcb.BitBlob(b"", 0, header, lengths)
        data = blob.to_bytes()
        self.assertEqual(50 + self.grid.size + 4, len(data))
        self.assertEqual((432 + self.grid.size * 8), blob.header_bits)
        self.assertEqual(tuple(lengths),
                         gcb.BitBlob.from_bytes(data).code_lengths)

    def test_payload_size_checked(self):
        self.assertRaises(exc.CorruptionError, gcb.BitBlob, b"\x00\x00", 8,
                          self.header)

    def test_bad_magic(self):
        data = bytearray(gcb.BitBlob.from_bits([1], self.header).to_bytes())
        data[:4] = b"GTF1"
        e = self.assertRaises(exc.FormatError, gcb.BitBlob.from_bytes, data)
        self.assertEqual(0, e.offset)

    def test_too_short(self):
        self.assertRaises(exc.FormatError, gcb.BitBlob.from_bytes,
                          b"GCB1\x01")

    def test_crc_mismatch(self):
        data = bytearray(gcb.BitBlob.from_bits([1] * 20,
                                               self.header).to_bytes())
        data[51] ^= 0x10
        self.assertRaises(exc.CorruptionError, gcb.BitBlob.from_bytes, data)

    @ddt.data((4, 2, 4), (5, 9, 5), (30, 0, 30))
    @ddt.unpack
    def test_bad_header_field(self, index, value, offset):
        data = bytearray(gcb.BitBlob.from_bits([1], self.header).to_bytes())
        data[index] = value
        e = self.assertRaises(exc.FormatError, gcb.BitBlob.from_bytes,
                              _recrc(data))
        self.assertEqual(offset, e.offset)

    def test_bad_params(self):
        data = bytearray(gcb.BitBlob.from_bits([1], self.header).to_bytes())
        data[14:22] = struct.pack("<d", -1.0)
        e = self.assertRaises(exc.FormatError, gcb.BitBlob.from_bytes,
                              _recrc(data))
        self.assertEqual(6, e.offset)

    def test_bit_length_disagrees_with_payload(self):
        data = bytearray(gcb.BitBlob.from_bits([1], self.header).to_bytes())
        data[42:50] = struct.pack("<Q", 9)
        self.assertRaises(exc.CorruptionError, gcb.BitBlob.from_bytes,
                          _recrc(data))

    def test_truncated_table(self):
        header = gcb.BlobHeader(self.grid.format, pmf.ModelTag.EMPIRICAL,
                                None, 0)
        data = gcb.BitBlob(b"", 0, header, [8] * self.grid.size).to_bytes()
        short = data[:100] + struct.pack("<I", zlib.crc32(data[:100]))
        self.assertRaises(exc.CorruptionError, gcb.BitBlob.from_bytes, short)

    def test_fuzz(self):
        grid = self.grid
        values = gennorm.sample(gennorm.GenNormParams(0.0, 1e-3, 1.0), 500, 1)
        stream = quantizer.quantize(values, grid)
        data = huffman.GenNormHuffmanCoder(grid).encode(stream,
                                                        values).to_bytes()
        rng = np.random.default_rng(77)
        for _ in range(10000):
            mutated = bytearray(data)
            position = int(rng.integers(0, len(data)))
            mutated[position] ^= int(rng.integers(1, 256))
            self.assertRaises((exc.FormatError, exc.CorruptionError),
                              gcb.BitBlob.from_bytes, mutated)
