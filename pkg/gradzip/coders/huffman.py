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

"""Canonical Huffman codes built from bin PMFs."""

import heapq
import logging

import numpy as np

from gradzip.coders import base
from gradzip.coders import blob as gcb
from gradzip.coders import pmf as pmflib
from gradzip import exc
from gradzip import gennorm
from gradzip import quantizer


LOG = logging.getLogger(__name__)

# Codewords are handled as unsigned 64-bit integers.
MAX_CODE_LENGTH = 63


class Codebook(object):
    """Canonical prefix code.

    Only code lengths are stored; codewords are assigned in (length, symbol)
    order, so equal lengths always give bit-identical codewords. A length of
    zero marks a symbol that is absent from the code.

    :param lengths: code length per symbol
    :param model: ModelTag of the PMF the lengths were built from
    :param params: fitted parameters of that PMF, if any
    """

    def __init__(self, lengths, model=pmflib.ModelTag.EMPIRICAL, params=None):
        lengths = np.array(lengths, dtype=np.int64).ravel()
        if lengths.size == 0 or np.any(lengths < 0):
            raise exc.CodingError("code lengths must be nonnegative and "
                                  "cover at least one symbol")
        if not np.any(lengths):
            raise exc.CodingError("code has no symbols")
        if lengths.max() > MAX_CODE_LENGTH:
            raise exc.CodingError("code length %d exceeds %d bits"
                                  % (lengths.max(), MAX_CODE_LENGTH))
        present = lengths[lengths > 0]
        kraft = float(np.sum(np.ldexp(1.0, -present)))
        if kraft > 1.0:
            raise exc.CodingError("code lengths violate the Kraft "
                                  "inequality (sum %r)" % kraft)
        lengths.setflags(write=False)
        self.lengths = lengths
        self.model = pmflib.ModelTag(model)
        self.params = params
        self._assign()

    def _assign(self):
        present = np.flatnonzero(self.lengths)
        order = present[np.lexsort((present, self.lengths[present]))]
        codewords = np.zeros(self.lengths.size, dtype=np.uint64)
        max_length = int(self.lengths.max())
        count = [0] * (max_length + 1)
        first_code = [0] * (max_length + 1)
        first_index = [0] * (max_length + 1)

        code, previous = 0, int(self.lengths[order[0]])
        for index, symbol in enumerate(order):
            length = int(self.lengths[symbol])
            code <<= length - previous
            previous = length
            if count[length] == 0:
                first_code[length] = code
                first_index[length] = index
            count[length] += 1
            codewords[symbol] = code
            code += 1
        codewords.setflags(write=False)

        self.codewords = codewords
        self.max_length = max_length
        self._sorted_symbols = [int(s) for s in order]
        self._count = count
        self._first_code = first_code
        self._first_index = first_index

    @property
    def size(self):
        return self.lengths.size

    def kraft_sum(self):
        present = self.lengths[self.lengths > 0]
        return float(np.sum(np.ldexp(1.0, -present)))

    def codeword(self, symbol):
        """Codeword of one symbol as a string of '0' and '1'."""
        length = int(self.lengths[symbol])
        if not length:
            raise exc.CodingError("symbol %d is not in the code" % symbol)
        return format(int(self.codewords[symbol]), "0%db" % length)

    def __eq__(self, other):
        if not isinstance(other, Codebook):
            return NotImplemented
        return np.array_equal(self.lengths, other.lengths)

    __hash__ = None

    def __repr__(self):
        return ("<Codebook %d symbols, max length %d>"
                % (np.count_nonzero(self.lengths), self.max_length))


def build_huffman(pmf):
    """Optimal prefix code for a BinPmf.

    Ties in the priority queue are broken by the lowest symbol index in
    each subtree, which makes the result reproducible. A single symbol with
    positive probability gets a one-bit codeword.

    :raises CodingError: when no symbol has positive probability
    """
    probabilities = pmf.probabilities
    present = np.flatnonzero(probabilities > 0)
    lengths = np.zeros(probabilities.size, dtype=np.int64)
    if present.size == 0:
        raise exc.CodingError("no symbol has positive probability")
    if present.size == 1:
        lengths[present[0]] = 1
        return Codebook(lengths, model=pmf.model, params=pmf.params)

    heap = [(float(probabilities[s]), int(s), [int(s)]) for s in present]
    heapq.heapify(heap)
    while len(heap) > 1:
        w1, low1, members1 = heapq.heappop(heap)
        w2, low2, members2 = heapq.heappop(heap)
        members = members1 + members2
        lengths[members] += 1
        heapq.heappush(heap, (w1 + w2, min(low1, low2), members))
    return Codebook(lengths, model=pmf.model, params=pmf.params)


def expected_length(pmf_true, codebook):
    """Average bits per symbol of a code under the true PMF.

    Infinite when the true PMF puts mass on a symbol the code lacks.

    :raises CodingError: on alphabet size mismatch
    """
    probabilities = pmf_true.probabilities
    if probabilities.size != codebook.size:
        raise exc.CodingError("PMF has %d bins but the code %d symbols"
                              % (probabilities.size, codebook.size))
    if np.any((probabilities > 0) & (codebook.lengths == 0)):
        return float("inf")
    return float(np.dot(probabilities, codebook.lengths))


def encode_bits(indices, codebook):
    """Concatenated codewords, most significant bit first, as 0/1 array."""
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size == 0:
        return np.zeros(0, dtype=np.uint8)
    lengths = codebook.lengths[indices]
    if np.any(lengths == 0):
        position = int(np.flatnonzero(lengths == 0)[0])
        raise exc.CodingError("symbol %d at position %d is not in the code"
                              % (indices[position], position))
    codes = codebook.codewords[indices]
    starts = np.cumsum(lengths) - lengths
    bits = np.empty(int(lengths.sum()), dtype=np.uint8)
    # grouped by code length, memory is linear in the output
    for length in np.unique(lengths):
        members = lengths == length
        group_codes = codes[members]
        group_starts = starts[members]
        for position in range(int(length)):
            shift = np.uint64(length - 1 - position)
            bits[group_starts + position] = (
                (group_codes >> shift) & np.uint64(1))
    return bits


def decode_bits(bits, count, codebook):
    """Inverse of :func:`encode_bits` for exactly ``count`` symbols.

    :raises CorruptionError: on a bit pattern that is no codeword, on
                             premature end of data and on trailing bits
    """
    bits = np.asarray(bits, dtype=np.uint8).tolist()
    total = len(bits)
    counts = codebook._count
    first_code = codebook._first_code
    first_index = codebook._first_index
    symbols = codebook._sorted_symbols
    max_length = codebook.max_length

    out = np.empty(count, dtype=np.int64)
    pos = 0
    for n in range(count):
        start = pos
        code = 0
        length = 0
        while True:
            if pos >= total:
                raise exc.CorruptionError(
                    "bit stream ended inside symbol %d of %d" % (n, count),
                    offset=pos)
            code = (code << 1) | bits[pos]
            pos += 1
            length += 1
            delta = code - first_code[length]
            if counts[length] and 0 <= delta < counts[length]:
                out[n] = symbols[first_index[length] + delta]
                break
            if length >= max_length:
                raise exc.CorruptionError("no codeword matches the bits",
                                          offset=start)
    if pos != total:
        raise exc.CorruptionError("%d undecoded trailing bits" % (total - pos),
                                  offset=pos)
    return out


def encode(stream, codebook):
    """Huffman-code a SymbolStream into a standalone BitBlob."""
    if codebook.size != stream.grid.size:
        raise exc.CodingError("code covers %d symbols, grid has %d bins"
                              % (codebook.size, stream.grid.size))
    bits = encode_bits(stream.indices, codebook)
    header = gcb.BlobHeader(stream.grid.format, codebook.model,
                            codebook.params, len(stream))
    code_lengths = None
    if codebook.model == pmflib.ModelTag.EMPIRICAL:
        code_lengths = codebook.lengths
    return gcb.BitBlob.from_bits(bits, header, code_lengths)


def decode(blob, codebook):
    """Recover the SymbolStream of a blob coded with ``codebook``."""
    grid = blob.header.grid
    if codebook.size != grid.size:
        raise exc.CodingError("code covers %d symbols, grid has %d bins"
                              % (codebook.size, grid.size))
    indices = decode_bits(blob.bits(), blob.header.symbol_count, codebook)
    return quantizer.SymbolStream(indices, grid)


class HuffmanCoder(base.Coder):
    """Huffman coding against a PMF rebuilt from the blob header."""

    model = None

    def make_pmf(self, stream, values):
        raise NotImplementedError()

    def codebook_from_header(self, blob):
        raise NotImplementedError()

    def encode(self, stream, values=None):
        return self.encode_with_rate(stream, values)[0]

    def encode_with_rate(self, stream, values=None):
        self.check_stream(stream)
        bin_pmf = self.make_pmf(stream, values)
        codebook = build_huffman(bin_pmf)
        return encode(stream, codebook), expected_length(bin_pmf, codebook)

    def decode(self, blob):
        self.check_blob(blob)
        return decode(blob, self.codebook_from_header(blob))

    def _model_codebook(self, blob):
        params = blob.header.params
        if params is None:
            raise exc.FormatError("%s blob carries no model parameters"
                                  % self.get_name())
        bin_pmf = pmflib.pmf_from_model(params, self.grid, model=self.model,
                                        floor=self.floor)
        return build_huffman(bin_pmf)


class GenNormHuffmanCoder(HuffmanCoder):
    """Huffman code from a generalized normal fit of the raw values."""

    model = pmflib.ModelTag.GENNORM

    @classmethod
    def get_name(cls):
        return "huffman-gennorm"

    def make_pmf(self, stream, values):
        params = self.params or gennorm.fit(self.require_values(values))
        return pmflib.pmf_from_model(params, self.grid, model=self.model,
                                     floor=self.floor)

    def codebook_from_header(self, blob):
        return self._model_codebook(blob)


class NormHuffmanCoder(HuffmanCoder):
    """Huffman code from a normal fit of the raw values."""

    model = pmflib.ModelTag.NORM

    @classmethod
    def get_name(cls):
        return "huffman-norm"

    def make_pmf(self, stream, values):
        params = self.params or gennorm.fit_norm(self.require_values(values))
        return pmflib.pmf_from_model(params, self.grid, model=self.model,
                                     floor=self.floor)

    def codebook_from_header(self, blob):
        return self._model_codebook(blob)


class EmpiricalHuffmanCoder(HuffmanCoder):
    """Huffman code from the symbol frequencies of the stream itself.

    Decoding needs no fit: the code lengths travel in the blob.
    """

    model = pmflib.ModelTag.EMPIRICAL

    @classmethod
    def get_name(cls):
        return "huffman-empirical"

    def make_pmf(self, stream, values):
        if len(stream) == 0:
            # any valid code will do for zero symbols
            return pmflib.BinPmf(np.full(self.grid.size, 1.0 / self.grid.size))
        return pmflib.pmf_empirical(stream, self.grid, floor=self.floor)

    def codebook_from_header(self, blob):
        if blob.code_lengths is None:
            raise exc.FormatError("empirical blob carries no code lengths")
        try:
            return Codebook(blob.code_lengths)
        except exc.CodingError as e:
            raise exc.CorruptionError("invalid code length table: %s" % e)
