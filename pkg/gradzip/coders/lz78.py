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

"""LZ78 dictionary coding, the model-free baseline.

Each phrase is written as a (dictionary index, next symbol) pair. Before the
k-th phrase (counting from zero) the dictionary holds k entries besides the
empty root phrase, so the index takes k.bit_length() bits; the symbol takes
a fixed (alphabet - 1).bit_length() bits. A stream that ends inside a known
phrase repeats that phrase's own pair, which both sides add to the
dictionary as a duplicate entry. The decoder stops at the symbol count of
the header.
"""

import logging

import numpy as np

from gradzip.coders import base
from gradzip.coders import blob as gcb
from gradzip.coders import pmf
from gradzip import exc
from gradzip import quantizer


LOG = logging.getLogger(__name__)


def symbol_width(alphabet_size):
    return max(int(alphabet_size) - 1, 0).bit_length()


def _bits_to_array(text):
    if not text:
        return np.zeros(0, dtype=np.uint8)
    return np.frombuffer(text.encode("ascii"), dtype=np.uint8) - ord("0")


def lz78_encode(stream, trace=None):
    """Encode a SymbolStream.

    :param stream: SymbolStream to encode, may be empty
    :param trace: optional list receiving the (parent, symbol) dictionary
                  entries in the order they are created
    :returns: BitBlob with the universal model tag
    """
    sym_fmt = "0%db" % symbol_width(stream.grid.size)
    children = {}
    entries = [(0, 0)]
    out = []
    node = 0

    def emit(parent, symbol):
        k = len(entries) - 1
        if k:
            out.append(format(parent, "0%db" % k.bit_length()))
        out.append(format(symbol, sym_fmt))
        entries.append((parent, symbol))
        if trace is not None:
            trace.append((parent, symbol))

    for symbol in stream.indices.tolist():
        child = children.get((node, symbol))
        if child is not None:
            node = child
            continue
        children[(node, symbol)] = len(entries)
        emit(node, symbol)
        node = 0
    if node:
        # the stream ended inside a known phrase
        emit(*entries[node])

    bits = _bits_to_array("".join(out))
    header = gcb.BlobHeader(stream.grid.format, pmf.ModelTag.UNIVERSAL,
                            None, len(stream))
    LOG.debug("LZ78 parsed %d symbols into %d phrases, %d bits",
              len(stream), len(entries) - 1, bits.size)
    return gcb.BitBlob.from_bits(bits, header)


def lz78_decode(blob, trace=None):
    """Decode a blob produced by :func:`lz78_encode`.

    :param trace: optional list receiving the rebuilt dictionary entries
    :raises CorruptionError: on references to unknown entries, symbols
                             outside the alphabet, truncated data and
                             trailing bits
    """
    grid = blob.header.grid
    count = blob.header.symbol_count
    width = symbol_width(grid.size)
    text = (blob.bits() + ord("0")).tobytes().decode("ascii")
    total = len(text)
    entries = [(0, 0)]
    out = []
    pos = 0

    def read(nbits):
        if pos + nbits > total:
            raise exc.CorruptionError("bit stream ended inside phrase %d"
                                      % (len(entries) - 1), offset=pos)
        return int(text[pos:pos + nbits], 2) if nbits else 0

    while len(out) < count:
        k = len(entries) - 1
        start = pos
        index = read(k.bit_length())
        pos += k.bit_length()
        symbol = read(width)
        pos += width
        if index > k:
            raise exc.CorruptionError("reference to entry %d of %d"
                                      % (index, k), offset=start)
        if symbol >= grid.size:
            raise exc.CorruptionError("symbol %d outside the %d-bin alphabet"
                                      % (symbol, grid.size), offset=start)
        phrase = [symbol]
        node = index
        while node:
            node, parent_symbol = entries[node]
            phrase.append(parent_symbol)
        phrase.reverse()
        entries.append((index, symbol))
        if trace is not None:
            trace.append((index, symbol))
        if len(out) + len(phrase) > count:
            raise exc.CorruptionError("phrase overruns the symbol count %d"
                                      % count, offset=start)
        out.extend(phrase)
    if pos != total:
        raise exc.CorruptionError("%d undecoded trailing bits" % (total - pos),
                                  offset=pos)
    return quantizer.SymbolStream(np.array(out, dtype=np.int64), grid)


class LZ78Coder(base.Coder):
    """Universal coder, ignores any model."""

    model = pmf.ModelTag.UNIVERSAL

    @classmethod
    def get_name(cls):
        return "lz78"

    def encode(self, stream, values=None):
        self.check_stream(stream)
        return lz78_encode(stream)

    def decode(self, blob):
        self.check_blob(blob)
        return lz78_decode(blob)
