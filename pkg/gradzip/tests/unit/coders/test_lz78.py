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

import ddt
import numpy as np

from gradzip.coders import base
from gradzip.coders import blob as gcb
from gradzip.coders import huffman
from gradzip.coders import lz78
from gradzip.coders import pmf
from gradzip import exc
from gradzip import gennorm
from gradzip import quantizer
from gradzip.tests import test


def _bits(text):
    return [int(c) for c in text]


@ddt.ddt
class LZ78TestCase(test.TestCase):

    def setUp(self):
        super(LZ78TestCase, self).setUp()
        self.grid = quantizer.build_grid(quantizer.DEFAULT_FORMAT)

    def _stream(self, indices):
        return quantizer.SymbolStream(indices, self.grid)

    def _blob(self, text, count):
        header = gcb.BlobHeader(self.grid.format, pmf.ModelTag.UNIVERSAL,
                                None, count)
        return gcb.BitBlob.from_bits(_bits(text), header)

    @ddt.data((256, 8), (242, 8), (2, 1), (129, 8), (128, 7), (1, 0))
    @ddt.unpack
    def test_symbol_width(self, alphabet, width):
        self.assertEqual(width, lz78.symbol_width(alphabet))

    def test_worked_example(self):
        trace = []
        blob = lz78.lz78_encode(self._stream([0, 0, 0, 1]), trace)
        self.assertEqual([(0, 0), (1, 0), (0, 1)], trace)
        self.assertEqual(8 + 9 + 10, blob.bit_length)
        expected = "00000000" + "1" + "00000000" + "00" + "00000001"
        self.assertEqual(_bits(expected), blob.bits().tolist())

    def test_ends_inside_phrase(self):
        trace = []
        stream = self._stream([0, 0])
        blob = lz78.lz78_encode(stream, trace)
        self.assertEqual([(0, 0), (0, 0)], trace)
        self.assertEqual(17, blob.bit_length)
        self.assertEqual(stream, lz78.lz78_decode(blob))

    def test_constant_stream(self):
        trace = []
        stream = self._stream(np.full(5050, 7))
        blob = lz78.lz78_encode(stream, trace)
        # phrases of length 1, 2, ..., 100
        self.assertEqual(100, len(trace))
        self.assertEqual(stream, lz78.lz78_decode(blob))

    def test_traces_match(self):
        rng = np.random.default_rng(3)
        stream = self._stream(rng.integers(0, 4, 3000))
        encoded, decoded = [], []
        blob = lz78.lz78_encode(stream, encoded)
        self.assertEqual(stream, lz78.lz78_decode(blob, decoded))
        self.assertEqual(encoded, decoded)

    def test_empty(self):
        stream = self._stream([])
        blob = lz78.lz78_encode(stream)
        self.assertEqual(0, blob.bit_length)
        self.assertEqual(stream, lz78.lz78_decode(blob))

    def test_random_symbols(self):
        rng = np.random.default_rng(4)
        stream = self._stream(rng.integers(0, self.grid.size, 5000))
        self.assertEqual(stream, lz78.lz78_decode(lz78.lz78_encode(stream)))

    def test_index_out_of_range(self):
        # third phrase has a 2-bit index, 3 refers to a missing entry
        text = "00000000" + "0" + "00000001" + "11" + "00000000"
        e = self.assertRaises(exc.CorruptionError, lz78.lz78_decode,
                              self._blob(text, 10))
        self.assertEqual(17, e.offset)

    def test_symbol_outside_alphabet(self):
        e = self.assertRaises(exc.CorruptionError, lz78.lz78_decode,
                              self._blob(format(250, "08b"), 1))
        self.assertEqual(0, e.offset)

    def test_truncated(self):
        blob = lz78.lz78_encode(self._stream([0, 0, 0, 1]))
        header = blob.header
        short = gcb.BitBlob.from_bits(blob.bits()[:-1], header)
        self.assertRaises(exc.CorruptionError, lz78.lz78_decode, short)

    def test_trailing_bits(self):
        blob = lz78.lz78_encode(self._stream([0, 0, 0, 1]))
        longer = gcb.BitBlob.from_bits(np.append(blob.bits(), 0),
                                       blob.header)
        e = self.assertRaises(exc.CorruptionError, lz78.lz78_decode, longer)
        self.assertEqual(27, e.offset)

    def test_phrase_overruns_count(self):
        blob = lz78.lz78_encode(self._stream([0, 0, 0]))
        self.assertRaises(exc.CorruptionError, lz78.lz78_decode,
                          self._blob("".join(str(b) for b in blob.bits()), 2))


class LZ78CoderTestCase(test.TestCase):

    def setUp(self):
        super(LZ78CoderTestCase, self).setUp()
        self.grid = quantizer.build_grid(quantizer.DEFAULT_FORMAT)
        self.values = gennorm.sample(gennorm.GenNormParams(0.0, 1e-3, 1.0),
                                     20000, 31)
        self.stream = quantizer.quantize(self.values, self.grid)

    def test_registered(self):
        coder = base.get_coder("lz78", self.grid)
        self.assertIsInstance(coder, lz78.LZ78Coder)

    def test_standalone_round_trip(self):
        blob = lz78.LZ78Coder(self.grid).encode(self.stream)
        received = gcb.BitBlob.from_bytes(blob.to_bytes())
        self.assertEqual(pmf.ModelTag.UNIVERSAL, received.header.model)
        self.assertIsNone(received.header.params)
        self.assertEqual(432 + (-blob.bit_length % 8), received.header_bits)
        coder = base.get_coder_for_blob(received)
        self.assertEqual(self.stream, coder.decode(received))

    def test_no_rate(self):
        blob, rate = lz78.LZ78Coder(self.grid).encode_with_rate(self.stream)
        self.assertIsNone(rate)
        self.assertEqual(len(self.stream), blob.header.symbol_count)

    def test_worse_than_huffman_on_iid_data(self):
        universal = lz78.LZ78Coder(self.grid).encode(self.stream)
        empirical = huffman.EmpiricalHuffmanCoder(self.grid).encode(
            self.stream)
        self.assertGreater(universal.bit_length, empirical.bit_length)

    def test_rejects_other_models(self):
        blob = huffman.EmpiricalHuffmanCoder(self.grid).encode(self.stream)
        self.assertRaises(exc.FormatError, lz78.LZ78Coder(self.grid).decode,
                          blob)

    def test_rejects_other_grid(self):
        other = quantizer.build_grid(quantizer.Fp8Format(1, 4, 3, 7))
        self.assertRaises(exc.CodingError, lz78.LZ78Coder(other).encode,
                          self.stream)
