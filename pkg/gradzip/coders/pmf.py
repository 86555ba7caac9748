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

import enum
import logging

import numpy as np
from scipy import stats

from gradzip import exc
from gradzip import gennorm


LOG = logging.getLogger(__name__)

PMF_FLOOR = 2.0 ** -32
SUM_TOLERANCE = 1e-9


class ModelTag(enum.IntEnum):
    """Source of a bin PMF, also the model tag byte of GCB1 headers."""

    GENNORM = 1
    NORM = 2
    EMPIRICAL = 3
    UNIVERSAL = 4

    @classmethod
    def from_name(cls, name):
        try:
            return cls[name.upper()]
        except KeyError:
            raise exc.ParameterError("unknown model %r" % name)


class BinPmf(object):
    """Probability of every quantization bin.

    :param probabilities: one nonnegative value per bin, summing to one
    :param model: ModelTag of the source
    :param params: fitted GenNormParams, None for empirical PMFs
    """

    def __init__(self, probabilities, model=ModelTag.EMPIRICAL, params=None):
        probabilities = np.array(probabilities, dtype=np.float64).ravel()
        if probabilities.size == 0:
            raise exc.ParameterError("PMF over an empty alphabet")
        if np.any(~np.isfinite(probabilities)) or np.any(probabilities < 0):
            raise exc.ParameterError("probabilities must be finite and "
                                     "nonnegative")
        total = float(probabilities.sum())
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise exc.ParameterError("probabilities sum to %r, not 1" % total)
        probabilities.setflags(write=False)
        self.probabilities = probabilities
        self.model = ModelTag(model)
        self.params = params

    def __len__(self):
        return self.probabilities.size

    def __repr__(self):
        return "<BinPmf %s over %d bins>" % (self.model.name, len(self))


def _floored(masses, floor):
    masses = np.maximum(np.asarray(masses, dtype=np.float64), 0.0)
    masses = masses / masses.sum()
    masses = np.maximum(masses, floor)
    return masses / masses.sum()


def pmf_from_model(params, grid, model=ModelTag.GENNORM,
                   floor=PMF_FLOOR):
    """Bin masses of a fitted model.

    Mass below the first edge joins bin 0 and mass above the last edge
    joins the last bin. Bins left of the location take cdf differences and
    bins right of it take survival differences, so both tails are free of
    cancellation.
    """
    edges = grid.edges
    lower, upper = edges[:-1], edges[1:]
    from_left = gennorm.cdf(upper, params) - gennorm.cdf(lower, params)
    from_right = gennorm.sf(lower, params) - gennorm.sf(upper, params)
    masses = np.where(upper <= params.mu, from_left, from_right)
    masses[0] += gennorm.cdf(edges[0], params)
    masses[-1] += gennorm.sf(edges[-1], params)
    return BinPmf(_floored(masses, floor), model=model, params=params)


def pmf_empirical(stream, grid, floor=PMF_FLOOR):
    """Relative symbol frequencies, floored like the model PMFs."""
    if len(stream) == 0:
        raise exc.InputError("empirical PMF of an empty stream")
    counts = np.bincount(stream.indices, minlength=grid.size)
    return BinPmf(_floored(counts, floor), model=ModelTag.EMPIRICAL)


def entropy(pmf):
    """Shannon entropy in bits."""
    return float(stats.entropy(pmf.probabilities, base=2))
