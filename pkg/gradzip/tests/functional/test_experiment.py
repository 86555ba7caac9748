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
import logging
import os

from oslo_config import cfg

from gradzip.harness import federated
from gradzip import opts
from gradzip.tests import test


CONF = cfg.CONF
LOG = logging.getLogger(__name__)


class ExperimentTestCase(test.FunctionalTestCase):

    def setUp(self):
        super(ExperimentTestCase, self).setUp()
        opts.set_defaults(CONF)
        CONF(["--config-file", os.path.dirname(__file__) + "/config.cfg"])
        self.addCleanup(CONF.clear)

    def _recount(self, path):
        totals = {}
        with open(path, newline="") as f:
            for row in csv.DictReader(f):
                bits = int(row["payload_bits"]) + int(row["header_bits"])
                totals[row["coder"]] = totals.get(row["coder"], 0) + bits
        return totals

    def test_reference_run(self):
        config = federated.ExperimentConfig.from_conf(CONF)
        self.assertEqual(50, config.rounds)
        result = federated.run_experiment(config)
        ledger = result.ledger

        rates = {spec: ledger.bits_per_symbol(spec) for spec in config.coders}
        LOG.info("Bits per symbol: %s", rates)
        self.assertLess(rates["huffman-gennorm"], rates["lz78"])
        self.assertLess(rates["huffman-norm"], rates["lz78"])
        self.assertLess(rates["huffman-empirical"], 8.0)
        self.assertLessEqual(rates["huffman-gennorm"],
                             rates["huffman-norm"] * 1.05)
        self.assertEqual(ledger.payload_bits("lz78"),
                         ledger.expected_bits("lz78"))
        self.assertEqual(list(range(50)), ledger.rounds())
        for round_index in ledger.rounds():
            self.assertGreater(
                ledger.payload_bits("lz78", round=round_index),
                ledger.payload_bits("huffman-gennorm", round=round_index))

        first, last = result.reports[0], result.reports[-1]
        self.assertLess(last.loss, first.loss)

        self.assertEqual(50, len(result.accuracy))
        final = result.accuracy[-1]
        self.assertLess(abs(final.raw_accuracy - final.quantized_accuracy),
                        0.05)
        self.assertEqual(2 * 50, len(result.fit_reports))

        output_dir = self.make_tempdir()
        written = federated.write_outputs(result, output_dir)
        self.assertEqual(4, len(written))
        recount = self._recount(os.path.join(output_dir, "ledger.csv"))
        self.assertEqual(sorted(config.coders), sorted(recount))
        for spec, total in recount.items():
            self.assertEqual(ledger.total_bits(spec), total)
