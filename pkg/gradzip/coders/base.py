# Copyright 2016 Mirantis Inc.
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

import logging

from gradzip import _utils
from gradzip.coders import pmf
from gradzip import exc

LOG = logging.getLogger(__name__)


def get_coder(spec, grid, *args, **kwargs):
    """Create coder's instance according to specified coder name"""
    spec = spec.strip().lower()
    LOG.debug("Looking up coder %s.", spec)
    for coder in _utils.itersubclasses(Coder):
        if spec == coder.get_name():
            return coder(grid, *args, **kwargs)

    raise exc.ParameterError("Coder not found for name: %s (known: %s)"
                             % (spec, ", ".join(available_coders())))


def available_coders():
    """Names of every concrete coder, sorted."""
    return sorted(c.get_name() for c in _utils.itersubclasses(Coder)
                  if c.model is not None)


def get_coder_for_blob(blob, *args, **kwargs):
    """Coder able to decode a blob, chosen from its model tag."""
    for coder in _utils.itersubclasses(Coder):
        if coder.model is not None and coder.model == blob.header.model:
            return coder(blob.header.grid, *args, **kwargs)
    raise exc.FormatError("no coder for model tag %d"
                          % int(blob.header.model))


class Coder(object):
    """Base Coder class.

    Every coder turns a SymbolStream into a standalone BitBlob and back.
    Subclasses set ``model`` to the ModelTag written into their blobs and
    implement encode() and decode().

    :param grid: QuantGrid the streams live on
    :param floor: minimum bin probability of model PMFs
    :param params: fixed GenNormParams to build the code from instead of
                   fitting the values passed to encode()
    """

    model = None

    def __init__(self, grid, floor=pmf.PMF_FLOOR, params=None):
        self.grid = grid
        self.floor = floor
        self.params = params

    @classmethod
    def get_name(cls):
        """Returns the spec name of the coder."""
        return cls.__name__

    def encode(self, stream, values=None):
        """Compress a symbol stream.

        :param stream: SymbolStream on this coder's grid
        :param values: pre-quantization values, required by coders that fit
                       a model when no fixed parameters were given
        :returns: BitBlob
        """
        raise NotImplementedError("{0}: This method is either not supported "
                                  "or has to be overridden".format(
                                      self.get_name()))

    def encode_with_rate(self, stream, values=None):
        """Encode and report the model-expected bits per symbol.

        :returns: (BitBlob, expected bits per symbol or None when the coder
                  has no model)
        """
        return self.encode(stream, values), None

    def decode(self, blob):
        """Recover the exact SymbolStream from a BitBlob."""
        raise NotImplementedError("{0}: This method is either not supported "
                                  "or has to be overridden".format(
                                      self.get_name()))

    def check_stream(self, stream):
        if stream.grid != self.grid:
            raise exc.CodingError("stream is on %r, coder on %r"
                                  % (stream.grid, self.grid))

    def check_blob(self, blob):
        if blob.header.model != self.model:
            raise exc.FormatError("%s can not decode a %s blob"
                                  % (self.get_name(),
                                     blob.header.model.name))
        if blob.header.grid != self.grid:
            raise exc.FormatError("blob grid %s does not match %s"
                                  % (blob.header.format, self.grid.format))

    def require_values(self, values):
        if values is None:
            raise exc.InputError("%s needs the pre-quantization values to "
                                 "fit its model" % self.get_name())
        return values
