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

"""Federated averaging with quantized, entropy coded up-link gradients.

Every round each user computes its local gradient, every layer is quantized
and coded with all configured coders, each blob goes through its wire form
and is decoded and compared to the original symbols, and the server steps
with the mean of the dequantized gradients. The GenNorm and normal models
of a layer are fitted once per round on the pooled pre-quantization
gradients of all users, and codebooks are rebuilt every round.
"""

from concurrent import futures
import csv
import dataclasses
import logging
import os

import numpy as np
from oslo_config import cfg
from oslo_utils import timeutils

from gradzip import _utils
from gradzip.coders import base
from gradzip.coders import blob as gcb
from gradzip.coders import pmf
from gradzip import exc
from gradzip import gennorm
from gradzip.harness import ledger as ledgerlib
from gradzip.harness import model as modellib
from gradzip import opts
from gradzip import quantizer
from gradzip import stats


LOG = logging.getLogger(__name__)

ROUND_FIELDS = ("round", "layer", "coder", "bits_per_symbol",
                "compression_ratio", "loss", "accuracy", "mu", "alpha",
                "beta")

ACCURACY_FIELDS = ("round", "raw_loss", "raw_accuracy", "quantized_loss",
                   "quantized_accuracy")


@dataclasses.dataclass(frozen=True)
class ExperimentConfig(object):
    users: int = 4
    rounds: int = 50
    input_dim: int = 20
    hidden_dim: int = 32
    classes: int = 2
    samples_per_user: int = 200
    test_samples: int = 1000
    blob_separation: float = 3.0
    batch_size: int = 0
    learning_rate: float = 0.01
    seed: int = 0
    workers: int = 1
    coders: tuple = ("lz78", "huffman-gennorm", "huffman-norm")
    format: quantizer.Fp8Format = quantizer.DEFAULT_FORMAT
    pmf_floor: float = pmf.PMF_FLOOR
    accuracy_comparison: bool = False

    def __post_init__(self):
        object.__setattr__(self, "coders", tuple(self.coders))
        for name in ("users", "input_dim", "hidden_dim", "samples_per_user",
                     "test_samples", "workers"):
            if getattr(self, name) < 1:
                raise exc.ParameterError("%s must be at least 1" % name)
        if self.classes < 2:
            raise exc.ParameterError("at least two classes are required")
        if self.rounds < 0 or self.batch_size < 0 or self.seed < 0:
            raise exc.ParameterError("rounds, batch_size and seed must be "
                                     "nonnegative")
        if not self.learning_rate > 0:
            raise exc.ParameterError("learning rate must be positive")
        if not self.coders:
            raise exc.ParameterError("at least one coder is required")
        known = base.available_coders()
        for spec in self.coders:
            if spec not in known:
                raise exc.ParameterError("unknown coder %r (known: %s)"
                                         % (spec, ", ".join(known)))
        for layer, size in self.layer_sizes().items():
            if self.users * size < gennorm.MIN_FIT_SAMPLES:
                raise exc.ParameterError(
                    "layer %s pools %d gradient values per round, fitting "
                    "needs at least %d" % (layer, self.users * size,
                                           gennorm.MIN_FIT_SAMPLES))

    def layer_sizes(self):
        d, h, c = self.input_dim, self.hidden_dim, self.classes
        return {"fc1": d * h + h, "fc2": h * c + c}

    @classmethod
    def from_conf(cls, conf=None):
        """Build a config from the [quantizer], [coder] and [harness]
        option groups.
        """
        if conf is None:
            conf = cfg.CONF
        h = conf.harness
        return cls(users=h.users, rounds=h.rounds, input_dim=h.input_dim,
                   hidden_dim=h.hidden_dim, classes=h.classes,
                   samples_per_user=h.samples_per_user,
                   test_samples=h.test_samples,
                   blob_separation=h.blob_separation,
                   batch_size=h.batch_size, learning_rate=h.learning_rate,
                   seed=h.seed, workers=h.workers,
                   coders=tuple(conf.coder.coders),
                   format=opts.get_format(conf),
                   pmf_floor=conf.coder.pmf_floor,
                   accuracy_comparison=h.accuracy_comparison)


@dataclasses.dataclass(frozen=True)
class LayerFit(object):
    gennorm: gennorm.GenNormParams
    norm: gennorm.GenNormParams


@dataclasses.dataclass(frozen=True)
class RoundReport(object):
    """Outcome of one round.

    ``rates`` maps layer -> coder -> payload bits per symbol over all users
    and ``fits`` maps layer -> LayerFit.
    """

    round: int
    loss: float
    accuracy: float
    rates: dict
    fits: dict

    def compression_ratio(self, layer, coder):
        return 8.0 / self.rates[layer][coder]

    def rows(self):
        for layer in sorted(self.rates):
            p = self.fits[layer].gennorm
            for coder in sorted(self.rates[layer]):
                bps = self.rates[layer][coder]
                ratio = 8.0 / bps if bps > 0 else float("inf")
                yield (self.round, layer, coder, repr(bps), repr(ratio),
                       repr(self.loss), repr(self.accuracy), repr(p.mu),
                       repr(p.alpha), repr(p.beta))


@dataclasses.dataclass(frozen=True)
class ExperimentResult(object):
    config: ExperimentConfig
    ledger: ledgerlib.OverheadLedger
    reports: tuple
    fit_reports: tuple
    model: modellib.ToyModel
    accuracy: tuple = ()


@dataclasses.dataclass(frozen=True)
class AccuracyPoint(object):
    round: int
    raw_loss: float
    raw_accuracy: float
    quantized_loss: float
    quantized_accuracy: float


class _Pool(object):
    """Ordered map over a thread pool, or inline with one worker."""

    def __init__(self, workers):
        self.workers = workers
        self._executor = None

    def __enter__(self):
        if self.workers > 1:
            self._executor = futures.ThreadPoolExecutor(self.workers)
        return self

    def __exit__(self, *exc_info):
        if self._executor is not None:
            self._executor.shutdown(wait=True)

    def map(self, func, items):
        if self._executor is None:
            return [func(item) for item in items]
        return list(self._executor.map(func, items))


def _setup(config):
    rng = np.random.default_rng(config.seed)
    clients, test = modellib.blob_task(
        config.users, config.samples_per_user, config.test_samples,
        config.input_dim, config.classes, config.blob_separation, rng)
    model = modellib.ToyModel.initialize(config.input_dim, config.hidden_dim,
                                         config.classes, rng)
    train_x = np.concatenate([c.features for c in clients])
    train_y = np.concatenate([c.labels for c in clients])
    return clients, test, model, (train_x, train_y)


def _code_stream(config, grid, round_index, user, layer, values, fit):
    """Quantize one gradient vector, run every coder and verify each blob.

    :returns: (ledger entries, dequantized values)
    :raises CorruptionError: when any coder does not reproduce the symbols
    """
    stream = quantizer.quantize(values, grid)
    entries = []
    for spec in config.coders:
        coder = base.get_coder(spec, grid, floor=config.pmf_floor)
        if coder.model == pmf.ModelTag.GENNORM:
            coder.params = fit.gennorm
        elif coder.model == pmf.ModelTag.NORM:
            coder.params = fit.norm
        blob, rate = coder.encode_with_rate(stream, values)
        received = gcb.BitBlob.from_bytes(blob.to_bytes())
        decoded = coder.decode(received)
        if decoded != stream:
            raise exc.CorruptionError(
                "%s did not reproduce the %s stream of user %d in round %d"
                % (spec, layer, user, round_index))
        expected = blob.bit_length if rate is None else rate * len(stream)
        entries.append(ledgerlib.LedgerEntry(
            round=round_index, user=user, layer=layer, coder=spec,
            payload_bits=blob.bit_length, header_bits=blob.header_bits,
            symbols=len(stream), expected_bits=expected))
    return entries, quantizer.dequantize(stream, grid)


def _fit_layers(gradients, round_index):
    fits, reports = {}, []
    for layer in modellib.LAYERS:
        pooled = np.concatenate([g[layer] for g in gradients])
        gn, gn_diag = gennorm.fit_with_diagnostics(pooled)
        nm = gennorm.fit_norm(pooled)
        fits[layer] = LayerFit(gn, nm)
        reports.append(stats.fit_report(pooled, round_index, layer,
                                        gennorm_params=gn, norm_params=nm))
        LOG.debug("Round %d layer %s: beta %.4f (ratio %.4f, %d solver "
                  "iterations)", round_index, layer, gn.beta, gn_diag.ratio,
                  gn_diag.iterations)
    return fits, reports


def run_experiment(config):
    """Train the toy model for ``config.rounds`` coded rounds.

    :returns: ExperimentResult with the ledger, one RoundReport per round,
              one FitReport per layer and round and the final model
    :raises CorruptionError: when a coder round trip fails
    """
    grid = quantizer.build_grid(config.format)
    clients, test, model, (train_x, train_y) = _setup(config)
    ledger = ledgerlib.OverheadLedger()
    reports, fit_reports = [], []

    watch = timeutils.StopWatch()
    watch.start()
    LOG.info("Starting experiment: %d users, %d rounds, coders %s",
             config.users, config.rounds, ", ".join(config.coders))
    with _Pool(config.workers) as pool:
        for round_index in range(config.rounds):
            gradients = pool.map(
                lambda c: modellib.local_gradient(model, c,
                                                  config.batch_size),
                clients)
            fits, layer_reports = _fit_layers(gradients, round_index)
            fit_reports.extend(layer_reports)

            tasks = [(u, layer) for u in range(len(clients))
                     for layer in modellib.LAYERS]
            coded = pool.map(
                lambda t: _code_stream(config, grid, round_index, t[0], t[1],
                                       gradients[t[0]][t[1]], fits[t[1]]),
                tasks)
            entries = [e for round_entries, _ in coded for e in round_entries]
            received = [{} for _ in clients]
            for (user, layer), (_, values) in zip(tasks, coded):
                received[user][layer] = values
            ledger.commit(entries)

            model = modellib.update(model, modellib.aggregate(received),
                                    config.learning_rate)
            rates = {
                layer: {spec: ledger.bits_per_symbol(spec, layer=layer,
                                                     round=round_index)
                        for spec in config.coders}
                for layer in modellib.LAYERS}
            report = RoundReport(round=round_index,
                                 loss=model.loss(train_x, train_y),
                                 accuracy=model.accuracy(test.features,
                                                         test.labels),
                                 rates=rates, fits=fits)
            reports.append(report)
            LOG.debug("Round %d: loss %.6f, accuracy %.4f, rates %s",
                      round_index, report.loss, report.accuracy, rates)

    accuracy = ()
    if config.accuracy_comparison:
        accuracy = accuracy_comparison(config)
    LOG.info("Experiment finished in %.2f seconds, %d ledger entries",
             watch.elapsed(), len(ledger))
    return ExperimentResult(config=config, ledger=ledger,
                            reports=tuple(reports),
                            fit_reports=tuple(fit_reports), model=model,
                            accuracy=accuracy)


def _train_curve(config, quantize):
    grid = quantizer.build_grid(config.format)
    clients, test, model, (train_x, train_y) = _setup(config)
    curve = []
    for _round in range(config.rounds):
        gradients = [modellib.local_gradient(model, c, config.batch_size)
                     for c in clients]
        if quantize:
            gradients = [{name: quantizer.quantize_dequantize(g, grid)
                          for name, g in gradient.items()}
                         for gradient in gradients]
        model = modellib.update(model, modellib.aggregate(gradients),
                                config.learning_rate)
        curve.append((model.loss(train_x, train_y),
                      model.accuracy(test.features, test.labels)))
    return curve


def accuracy_comparison(config, quantize=True):
    """Paired full-precision and quantized trainings from the same seed.

    :param quantize: quantize the gradients of the second arm; with False
                     both arms train on raw gradients
    :returns: tuple of AccuracyPoint, one per round
    """
    raw = _train_curve(config, quantize=False)
    quantized = _train_curve(config, quantize=quantize)
    return tuple(AccuracyPoint(i, r[0], r[1], q[0], q[1])
                 for i, (r, q) in enumerate(zip(raw, quantized)))


def write_round_reports(reports, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(ROUND_FIELDS)
    for report in reports:
        writer.writerows(report.rows())


def write_accuracy(points, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(ACCURACY_FIELDS)
    for point in points:
        writer.writerow([point.round] + [repr(v) for v in
                                         dataclasses.astuple(point)[1:]])


def write_outputs(result, output_dir):
    """Write every CSV of an experiment into ``output_dir``.

    :returns: list of the written paths
    """
    outputs = [
        ("ledger.csv", ledgerlib.write_ledger, result.ledger),
        ("rounds.csv", write_round_reports, result.reports),
        ("fits.csv", stats.write_fit_reports, result.fit_reports),
    ]
    if result.config.accuracy_comparison:
        outputs.append(("accuracy.csv", write_accuracy, result.accuracy))
    rendered = [(os.path.join(output_dir, name), _utils.render(write, data))
                for name, write, data in outputs]
    _utils.atomic_write_many(rendered)
    for path, _text in rendered:
        LOG.info("Wrote %s", path)
    return [path for path, _ in rendered]
