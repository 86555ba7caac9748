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

"""Fit-validation metrics for gradient samples."""

import collections
import csv
import dataclasses
import logging
import math

import numpy as np
from scipy import stats as sp_stats

from gradzip import exc
from gradzip import gennorm


LOG = logging.getLogger(__name__)

CI_METHOD = "normal-theory"

FIT_REPORT_FIELDS = ("epoch", "layer", "w1_gn", "w1_n", "w2_gn", "w2_n",
                     "w2_paper_variant_gn", "w2_paper_variant_n",
                     "kurt_sample", "kurt_model", "mu", "alpha", "beta",
                     "excess_kurt_sample")

HISTOGRAM_FIELDS = ("lower", "upper", "center", "density", "gennorm_pdf",
                    "norm_pdf")


@dataclasses.dataclass(frozen=True)
class FitReport(object):
    """Distances between one gradient sample and its two fitted models.

    ``w2_paper_variant_*`` hold the square root of the order-1 integral.
    """

    epoch: int
    layer_label: str
    w1_gennorm: float
    w1_norm: float
    w2_gennorm: float
    w2_norm: float
    w2_paper_variant_gennorm: float
    w2_paper_variant_norm: float
    sample_kurtosis: float
    model_kurtosis: float
    gennorm_params: gennorm.GenNormParams
    norm_params: gennorm.GenNormParams

    @property
    def excess_kurtosis(self):
        return self.sample_kurtosis - 3.0

    def as_row(self):
        p = self.gennorm_params
        return (self.epoch, self.layer_label, self.w1_gennorm, self.w1_norm,
                self.w2_gennorm, self.w2_norm, self.w2_paper_variant_gennorm,
                self.w2_paper_variant_norm, self.sample_kurtosis,
                self.model_kurtosis, p.mu, p.alpha, p.beta,
                self.excess_kurtosis)


@dataclasses.dataclass(frozen=True)
class MomentCI(object):
    mean: float
    mean_halfwidth: float
    variance: float
    variance_halfwidth: float
    confidence_level: float
    samples: int
    method: str = CI_METHOD

    @property
    def mean_interval(self):
        return (self.mean - self.mean_halfwidth,
                self.mean + self.mean_halfwidth)

    @property
    def variance_interval(self):
        return (self.variance - self.variance_halfwidth,
                self.variance + self.variance_halfwidth)


@dataclasses.dataclass(frozen=True)
class HistogramRow(object):
    lower: float
    upper: float
    center: float
    density: float
    gennorm_pdf: float
    norm_pdf: float


def _finite_sample(data, minimum, what):
    data = np.asarray(data, dtype=np.float64).ravel()
    if data.size < minimum:
        raise exc.InputError("%s needs at least %d values, got %d"
                             % (what, minimum, data.size))
    finite = np.isfinite(data)
    if not np.all(finite):
        position = int(np.flatnonzero(~finite)[0])
        raise exc.InputError("non-finite value at position %d" % position,
                             position=position)
    return data


def _segment_integrals(sample, model):
    """Exact quantile-coupling integrals of every sorted sample point.

    The empirical quantile function equals the i-th order statistic on
    ((i - 1) / n, i / n]; substituting z = cdf(t) turns each piece into an
    integral of (x_i - t) ** k against the density between two model
    quantiles, which the partial moments give in closed form.

    :returns: (order-1 integral, order-2 integral)
    """
    x = np.sort(sample) - model.mu
    n = x.size
    inner = gennorm.quantile(np.arange(1, n) / n, model) - model.mu
    bounds = np.concatenate(([-np.inf], inner, [np.inf]))

    def moment(t, order):
        return np.asarray(gennorm.partial_moments(t + model.mu, model,
                                                  order))

    p0 = moment(bounds, 0)
    p1 = moment(bounds, 1)
    p2 = moment(bounds, 2)
    d0, d1, d2 = np.diff(p0), np.diff(p1), np.diff(p2)
    squared = np.maximum(x * x * d0 - 2.0 * x * d1 + d2, 0.0)

    lo, hi = bounds[:-1], bounds[1:]
    split = np.clip(x, lo, hi)
    c0, c1 = moment(split, 0), moment(split, 1)
    below = x * (c0 - p0[:-1]) - (c1 - p1[:-1])
    above = (p1[1:] - c1) - x * (p0[1:] - c0)
    absolute = np.maximum(below, 0.0) + np.maximum(above, 0.0)
    return float(np.sum(absolute)), float(np.sum(squared))


def wasserstein(sample, model, order=2, paper_variant=False):
    """1-D Wasserstein distance between a sample and a fitted model.

    :param sample: at least two finite values
    :param model: GenNormParams of the model
    :param order: 1 or 2
    :param paper_variant: return the square root of the order-1 integral
                          instead, whatever ``order`` says
    """
    if order not in (1, 2):
        raise exc.ParameterError("Wasserstein order must be 1 or 2, got %r"
                                 % (order,))
    sample = _finite_sample(sample, 2, "Wasserstein distance")
    absolute, squared = _segment_integrals(sample, model)
    if paper_variant:
        return math.sqrt(absolute)
    if order == 1:
        return absolute
    return math.sqrt(squared)


def sample_kurtosis(data):
    """Plain (non-excess) kurtosis m4 / m2 ** 2 of the central moments."""
    data = _finite_sample(data, 4, "kurtosis")
    if np.all(data == data[0]):
        raise exc.InputError("kurtosis of data with zero variance")
    return float(sp_stats.kurtosis(data, fisher=False, bias=True))


def moment_ci(data, level=0.95):
    """Normal-theory confidence intervals of the mean and the variance.

    mean +/- z * s / sqrt(n) and s ** 2 +/- z * s ** 2 * sqrt(2 / (n - 1)),
    z being the two-sided standard normal quantile of ``level``.
    """
    if not 0.0 < level < 1.0:
        raise exc.ParameterError("confidence level must be in (0, 1), got %r"
                                 % (level,))
    data = _finite_sample(data, 30, "confidence interval")
    n = data.size
    z = float(sp_stats.norm.ppf(0.5 + level / 2.0))
    mean = float(np.mean(data))
    variance = float(np.var(data, ddof=1))
    return MomentCI(mean=mean,
                    mean_halfwidth=z * math.sqrt(variance / n),
                    variance=variance,
                    variance_halfwidth=z * variance * math.sqrt(2.0 / (n - 1)),
                    confidence_level=level,
                    samples=n)


def fit_report(data, epoch, layer_label, gennorm_params=None,
               norm_params=None):
    """Fit both models and measure how close each one is to the data.

    :param gennorm_params: reuse an existing GenNorm fit of ``data``
    :param norm_params: reuse an existing normal fit of ``data``
    :raises FitError: propagated from the fits
    """
    data = np.asarray(data, dtype=np.float64).ravel()
    if gennorm_params is None:
        gennorm_params = gennorm.fit(data)
    if norm_params is None:
        norm_params = gennorm.fit_norm(data)

    gn_abs, gn_sq = _segment_integrals(data, gennorm_params)
    n_abs, n_sq = _segment_integrals(data, norm_params)
    report = FitReport(
        epoch=epoch, layer_label=layer_label,
        w1_gennorm=gn_abs, w1_norm=n_abs,
        w2_gennorm=math.sqrt(gn_sq), w2_norm=math.sqrt(n_sq),
        w2_paper_variant_gennorm=math.sqrt(gn_abs),
        w2_paper_variant_norm=math.sqrt(n_abs),
        sample_kurtosis=sample_kurtosis(data),
        model_kurtosis=gennorm.moments(gennorm_params).kurtosis,
        gennorm_params=gennorm_params, norm_params=norm_params)
    LOG.debug("Fit report %s epoch %d: W2 gennorm %.6g, norm %.6g",
              layer_label, epoch, report.w2_gennorm, report.w2_norm)
    return report


def kurtosis_trajectories(reports):
    """Map every layer label to its (epoch, sample kurtosis) sequence."""
    trajectories = collections.defaultdict(list)
    for report in sorted(reports, key=lambda r: (r.layer_label, r.epoch)):
        trajectories[report.layer_label].append(
            (report.epoch, report.sample_kurtosis))
    return dict(trajectories)


def histogram(data, gennorm_params, norm_params, bins=50):
    """Density histogram with both fitted densities at the bin centers."""
    data = _finite_sample(data, 1, "histogram")
    if bins < 1:
        raise exc.ParameterError("histogram needs at least one bin")
    density, edges = np.histogram(data, bins=bins, density=True)
    centers = (edges[:-1] + edges[1:]) / 2.0
    gn = np.atleast_1d(gennorm.pdf(centers, gennorm_params))
    nm = np.atleast_1d(gennorm.pdf(centers, norm_params))
    return [HistogramRow(float(edges[i]), float(edges[i + 1]),
                         float(centers[i]), float(density[i]),
                         float(gn[i]), float(nm[i]))
            for i in range(centers.size)]


def _format(value):
    if isinstance(value, float):
        return repr(value)
    return value


def write_fit_reports(reports, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(FIT_REPORT_FIELDS)
    for report in reports:
        writer.writerow([_format(v) for v in report.as_row()])


def write_histogram(rows, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(HISTOGRAM_FIELDS)
    for row in rows:
        writer.writerow([repr(v) for v in dataclasses.astuple(row)])
