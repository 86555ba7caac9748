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

"""Emulated 8-bit sign-exponent-mantissa quantization.

The representable values of the format are only used as bin edges: every
input is mapped to the index of the bin that contains it and the bin
midpoint is its reconstruction.
"""

import csv
import dataclasses
import functools
import logging

import numpy as np

from gradzip import exc


LOG = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class Fp8Format(object):
    """Bit layout of the emulated float.

    Exponent code 0 is zero for every mantissa. Codes 1 ..
    2**exponent_bits - 2 hold the normal values
    (1 + m / 2**mantissa_bits) * 2**(code - exponent_bias). The all-ones
    code, which IEEE reserves for inf/NaN, is the finite top anchor
    2**top_exponent for every mantissa.
    """

    sign_bits: int = 1
    exponent_bits: int = 5
    mantissa_bits: int = 2
    exponent_bias: int = 17
    top_exponent: int = 15

    def __post_init__(self):
        if self.sign_bits != 1:
            raise exc.ParameterError("exactly one sign bit is supported")
        if self.exponent_bits < 2 or self.mantissa_bits < 0:
            raise exc.ParameterError("exponent needs at least 2 bits")
        if self.sign_bits + self.exponent_bits + self.mantissa_bits != 8:
            raise exc.ParameterError(
                "format [%d,%d,%d] is not 8 bits wide"
                % (self.sign_bits, self.exponent_bits, self.mantissa_bits))
        if not 0 <= self.exponent_bias < 256:
            raise exc.ParameterError("exponent bias must fit in one byte")
        if self.top_exponent <= self.max_exponent:
            raise exc.ParameterError("top anchor must exceed the normal "
                                     "range")

    @classmethod
    def parse(cls, text, exponent_bias=None):
        """Build a format from a "sign,exponent,mantissa" string."""
        try:
            sign, exponent, mantissa = (int(p) for p in text.split(","))
        except ValueError:
            raise exc.ParameterError("format must look like '1,5,2', got %r"
                                     % text)
        kwargs = {}
        if exponent_bias is not None:
            kwargs["exponent_bias"] = exponent_bias
        return cls(sign, exponent, mantissa, **kwargs)

    @property
    def min_exponent(self):
        return 1 - self.exponent_bias

    @property
    def max_exponent(self):
        return (2 ** self.exponent_bits - 2) - self.exponent_bias

    @property
    def descriptor(self):
        """The four descriptor bytes written in blob headers."""
        return bytes([self.sign_bits, self.exponent_bits,
                      self.mantissa_bits, self.exponent_bias])

    @classmethod
    def from_descriptor(cls, data):
        sign, exponent, mantissa, bias = bytes(data)
        return cls(sign, exponent, mantissa, bias)

    def decode(self, pattern):
        """Value of one 8-bit pattern."""
        if not 0 <= pattern < 256:
            raise exc.ParameterError("bit pattern %r out of range" % pattern)
        steps = 2 ** self.mantissa_bits
        mantissa = pattern & (steps - 1)
        code = (pattern >> self.mantissa_bits) & (2 ** self.exponent_bits - 1)
        sign = -1.0 if pattern >> (self.exponent_bits
                                   + self.mantissa_bits) else 1.0
        if code == 0:
            # NOTE: flushed to zero, the smallest positive edge is then
            # 2**min_exponent.
            magnitude = 0.0
        elif code == 2 ** self.exponent_bits - 1:
            magnitude = 2.0 ** self.top_exponent
        else:
            magnitude = ((1.0 + mantissa / steps)
                         * 2.0 ** (code - self.exponent_bias))
        return sign * magnitude

    def __str__(self):
        return "[%d,%d,%d]" % (self.sign_bits, self.exponent_bits,
                               self.mantissa_bits)


DEFAULT_FORMAT = Fp8Format()


class QuantGrid(object):
    """Bin edges and midpoint centers produced by :func:`build_grid`."""

    def __init__(self, fmt, edges):
        edges = np.array(edges, dtype=np.float64)
        if edges.ndim != 1 or edges.size < 2:
            raise exc.ParameterError("a grid needs at least two edges")
        if np.any(np.diff(edges) <= 0):
            raise exc.ParameterError("grid edges must be strictly "
                                     "increasing")
        centers = (edges[:-1] + edges[1:]) / 2.0
        edges.setflags(write=False)
        centers.setflags(write=False)
        self.format = fmt
        self.edges = edges
        self.centers = centers

    @property
    def grid_id(self):
        return self.format.descriptor

    @property
    def size(self):
        """Number of bins, the coder alphabet size."""
        return self.centers.size

    def widths(self):
        return np.diff(self.edges)

    def __eq__(self, other):
        if not isinstance(other, QuantGrid):
            return NotImplemented
        return (self.format == other.format
                and np.array_equal(self.edges, other.edges))

    def __hash__(self):
        return hash(self.format)

    def __repr__(self):
        return "<QuantGrid %s: %d bins>" % (self.format, self.size)


class SymbolStream(object):
    """Bin indices of a quantized tensor."""

    def __init__(self, indices, grid, original_length=None):
        indices = np.array(indices, dtype=np.int64).ravel()
        if original_length is None:
            original_length = indices.size
        if indices.size != original_length:
            raise exc.InputError("stream holds %d symbols but its original "
                                 "length is %d"
                                 % (indices.size, original_length))
        if indices.size and (indices.min() < 0
                             or indices.max() >= grid.size):
            bad = int(np.flatnonzero((indices < 0)
                                     | (indices >= grid.size))[0])
            raise exc.CorruptionError(
                "symbol %d at position %d is outside the %d-bin grid"
                % (indices[bad], bad, grid.size))
        indices.setflags(write=False)
        self.indices = indices
        self.grid = grid
        self.original_length = original_length

    @property
    def grid_id(self):
        return self.grid.grid_id

    def __len__(self):
        return self.original_length

    def __eq__(self, other):
        if not isinstance(other, SymbolStream):
            return NotImplemented
        return (self.grid == other.grid
                and np.array_equal(self.indices, other.indices))

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result

    __hash__ = None

    def __repr__(self):
        return "<SymbolStream %d symbols on %r>" % (len(self), self.grid)


@functools.lru_cache(maxsize=None)
def build_grid(fmt=DEFAULT_FORMAT):
    """Enumerate every bit pattern of the format into a bin grid."""
    values = {fmt.decode(pattern) for pattern in range(256)}
    # -0.0 and 0.0 collapse in the set, a single zero edge remains.
    grid = QuantGrid(fmt, sorted(values))
    LOG.debug("Built %r spanning [%r, %r]", grid, grid.edges[0],
              grid.edges[-1])
    return grid


def quantize(values, grid):
    """Map values to the index of the bin [edges[i], edges[i+1]).

    Values beyond the outermost edges saturate into the extreme bins.

    :raises InputError: on a non-finite value, naming its position
    """
    values = np.asarray(values, dtype=np.float64).ravel()
    finite = np.isfinite(values)
    if not np.all(finite):
        position = int(np.flatnonzero(~finite)[0])
        raise exc.InputError("non-finite value %r at position %d"
                             % (values[position], position),
                             position=position)
    indices = np.searchsorted(grid.edges, values, side="right") - 1
    saturated = int(np.count_nonzero((indices < 0)
                                     | (indices >= grid.size)))
    if saturated:
        LOG.warning("%d of %d values saturated outside [%r, %r]",
                    saturated, values.size, grid.edges[0], grid.edges[-1])
    indices = np.clip(indices, 0, grid.size - 1)
    return SymbolStream(indices, grid)


def dequantize(stream, grid):
    """Map every symbol to its bin center.

    :raises CorruptionError: when a symbol is outside the grid
    """
    indices = stream.indices
    if indices.size and (indices.min() < 0 or indices.max() >= grid.size):
        raise exc.CorruptionError("stream does not belong to %r" % grid)
    return grid.centers[indices]


def quantize_dequantize(values, grid):
    values = np.asarray(values, dtype=np.float64)
    return dequantize(quantize(values, grid), grid).reshape(values.shape)


def dump_grid(grid, stream):
    """Write the audit CSV (index, lower_edge, upper_edge, center)."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(("index", "lower_edge", "upper_edge", "center"))
    for i, center in enumerate(grid.centers):
        writer.writerow((i, repr(float(grid.edges[i])),
                         repr(float(grid.edges[i + 1])),
                         repr(float(center))))
