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

import csv
import os
from unittest import mock

import ddt
from oslo_config import fixture

from gradzip import _utils
from gradzip.coders import lz78
from gradzip import exc
from gradzip.harness import federated
from gradzip import opts
from gradzip import quantizer
from gradzip.tests import test


ALL_CODERS = ("lz78", "huffman-gennorm", "huffman-norm", "huffman-empirical")


def small_config(**kwargs):
    params = dict(users=3, rounds=2, input_dim=4, hidden_dim=16, classes=2,
                  samples_per_user=30, test_samples=40, learning_rate=0.1,
                  seed=7, coders=ALL_CODERS)
    params.update(kwargs)
    return federated.ExperimentConfig(**params)


def read_csv(path):
    with open(path) as f:
        return list(csv.reader(f))


@ddt.ddt
class ExperimentConfigTestCase(test.TestCase):

    def test_layer_sizes(self):
        self.assertEqual({"fc1": 80, "fc2": 34}, small_config().layer_sizes())

    @ddt.data({"users": 0}, {"classes": 1}, {"rounds": -1},
              {"learning_rate": 0.0}, {"coders": ()},
              {"coders": ("zstd",)}, {"workers": 0},
              {"users": 1, "hidden_dim": 2})
    def test_invalid(self, kwargs):
        self.assertRaises(exc.ParameterError, small_config, **kwargs)

    def test_from_conf(self):
        conf_fixture = self.useFixture(fixture.Config())
        opts.set_defaults(conf_fixture.conf)
        conf_fixture.config(users=2, rounds=1, workers=3, group="harness")
        conf_fixture.config(coders=["lz78"], group="coder")
        config = federated.ExperimentConfig.from_conf(conf_fixture.conf)
        self.assertEqual(2, config.users)
        self.assertEqual(1, config.rounds)
        self.assertEqual(3, config.workers)
        self.assertEqual(("lz78",), config.coders)
        self.assertEqual(quantizer.DEFAULT_FORMAT, config.format)


class RunExperimentTestCase(test.TestCase):

    def test_ledger(self):
        config = small_config()
        result = federated.run_experiment(config)
        ledger = result.ledger
        self.assertEqual(2 * 3 * 2 * len(ALL_CODERS), len(ledger))
        self.assertEqual(sorted(ALL_CODERS), ledger.coders())
        sizes = config.layer_sizes()
        for entry in ledger.entries:
            self.assertEqual(sizes[entry.layer], entry.symbols)
            padding = -entry.payload_bits % 8
            if entry.coder == "huffman-empirical":
                self.assertEqual(432 + 242 * 8 + padding, entry.header_bits)
            else:
                self.assertEqual(432 + padding, entry.header_bits)
            if entry.coder == "lz78":
                self.assertEqual(entry.payload_bits, entry.expected_bits)
        for coder in ALL_CODERS:
            cumulative = [bits for _, bits in ledger.cumulative_bits(coder)]
            self.assertEqual(sorted(cumulative), cumulative)

    def test_reports(self):
        result = federated.run_experiment(small_config())
        self.assertEqual([0, 1], [r.round for r in result.reports])
        self.assertEqual(4, len(result.fit_reports))
        for report in result.reports:
            self.assertEqual({"fc1", "fc2"}, set(report.rates))
            self.assertEqual({"fc1", "fc2"}, set(report.fits))
            self.assertEqual(2.0, report.fits["fc1"].norm.beta)
            for layer in report.rates:
                for coder, rate in report.rates[layer].items():
                    self.assertGreater(rate, 0.0)
                    self.assertEqual(8.0 / rate,
                                     report.compression_ratio(layer, coder))
            self.assertEqual(2 * len(ALL_CODERS), len(list(report.rows())))
        self.assertEqual((), result.accuracy)

    def test_no_rounds(self):
        result = federated.run_experiment(small_config(rounds=0))
        self.assertEqual(0, len(result.ledger))
        self.assertEqual((), result.reports)
        self.assertEqual((), result.fit_reports)

    def test_deterministic(self):
        first = federated.run_experiment(small_config())
        second = federated.run_experiment(small_config())
        self.assertEqual(first.ledger.entries, second.ledger.entries)
        self.assertEqual(first.model, second.model)

    def test_workers_do_not_change_results(self):
        inline = federated.run_experiment(small_config(batch_size=8))
        threaded = federated.run_experiment(small_config(batch_size=8,
                                                         workers=3))
        self.assertEqual(inline.ledger.entries, threaded.ledger.entries)
        self.assertEqual(inline.model, threaded.model)

    def test_model_moves(self):
        config = small_config()
        before = federated.run_experiment(small_config(rounds=0)).model
        after = federated.run_experiment(config).model
        self.assertNotEqual(before, after)

    def test_failed_round_trip(self):

        def broken(blob):
            return quantizer.SymbolStream([], blob.header.grid)

        with mock.patch.object(lz78.LZ78Coder, "decode", side_effect=broken):
            self.assertRaises(exc.CorruptionError, federated.run_experiment,
                              small_config())

    def test_with_accuracy_comparison(self):
        result = federated.run_experiment(small_config(
            accuracy_comparison=True, coders=("lz78",)))
        self.assertEqual([0, 1], [p.round for p in result.accuracy])


class AccuracyComparisonTestCase(test.TestCase):

    def test_identical_arms_without_quantization(self):
        points = federated.accuracy_comparison(small_config(rounds=3),
                                               quantize=False)
        self.assertEqual(3, len(points))
        for point in points:
            self.assertEqual(point.raw_loss, point.quantized_loss)
            self.assertEqual(point.raw_accuracy, point.quantized_accuracy)

    def test_quantized_arm(self):
        points = federated.accuracy_comparison(small_config(rounds=3))
        for point in points:
            self.assertTrue(0.0 <= point.quantized_accuracy <= 1.0)
            self.assertAlmostEqual(point.raw_loss, point.quantized_loss,
                                   delta=0.1)


class WriteOutputsTestCase(test.TestCase):

    def test_files(self):
        output_dir = os.path.join(self.make_tempdir(), "out")
        config = small_config(accuracy_comparison=True)
        result = federated.run_experiment(config)
        paths = federated.write_outputs(result, output_dir)
        self.assertEqual(["accuracy.csv", "fits.csv", "ledger.csv",
                          "rounds.csv"], sorted(os.listdir(output_dir)))
        self.assertEqual(4, len(paths))

        ledger = read_csv(os.path.join(output_dir, "ledger.csv"))
        self.assertEqual(1 + len(result.ledger), len(ledger))
        rounds = read_csv(os.path.join(output_dir, "rounds.csv"))
        self.assertEqual(list(federated.ROUND_FIELDS), rounds[0])
        self.assertEqual(1 + 2 * 2 * len(ALL_CODERS), len(rounds))
        fits = read_csv(os.path.join(output_dir, "fits.csv"))
        self.assertEqual(1 + 4, len(fits))
        accuracy = read_csv(os.path.join(output_dir, "accuracy.csv"))
        self.assertEqual(list(federated.ACCURACY_FIELDS), accuracy[0])
        self.assertEqual(3, len(accuracy))

    def test_without_accuracy(self):
        output_dir = self.make_tempdir()
        result = federated.run_experiment(small_config(rounds=1))
        federated.write_outputs(result, output_dir)
        self.assertNotIn("accuracy.csv", os.listdir(output_dir))

    def test_failed_write_leaves_no_partial_set(self):
        output_dir = self.make_tempdir()
        result = federated.run_experiment(small_config(rounds=1))
        real_stage = _utils._stage

        def stage(path, data):
            if path.endswith("fits.csv"):
                raise OSError("disk full")
            return real_stage(path, data)

        with mock.patch.object(_utils, "_stage", side_effect=stage):
            self.assertRaises(OSError, federated.write_outputs, result,
                              output_dir)
        self.assertEqual([], os.listdir(output_dir))
