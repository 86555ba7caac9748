# Copyright 2014 Mirantis Inc.
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
import dataclasses
import logging
import os

from oslo_config import cfg
from oslo_serialization import jsonutils
from oslo_utils import encodeutils
import prettytable

from gradzip import _utils
from gradzip.cmd import cliutils
from gradzip.coders import base
from gradzip import exc
from gradzip.harness import federated
from gradzip import opts
from gradzip import quantizer
from gradzip import records
from gradzip import stats


LOG = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "GRADZIP_OUTPUT_DIR"
DEQUANTIZED_SUFFIX = ".dequantized.gtf"


def _output_dir(args, conf=None):
    return cliutils.first_set(
        args.output_dir,
        lambda: cliutils.env(OUTPUT_DIR_ENV),
        lambda: (cfg.CONF if conf is None else conf).output.output_dir,
        default=".")


def _output_path(args, default_name):
    if args.file_name:
        return args.file_name
    return os.path.join(_output_dir(args), default_name)


def _format(args):
    try:
        return quantizer.Fp8Format.parse(args.format, args.exponent_bias)
    except exc.ParameterError as e:
        raise exc.CommandError("invalid --format: %s" % e)


def _print_table(fields, rows):
    pretty_table = prettytable.PrettyTable(fields)
    pretty_table.align = "l"
    for row in rows:
        pretty_table.add_row(row)
    print(encodeutils.safe_encode(pretty_table.get_string()).decode())


def _print_json(data):
    print(jsonutils.dumps(data, indent=2, sort_keys=True))


def _read_records(path):
    try:
        return records.read_records(path)
    except OSError as e:
        raise exc.InputError("can not read %s: %s" % (path, e.strerror))


_format_args = [
    cliutils.arg("--format", dest="format", default="1,5,2",
                 help="Quantization format as sign,exponent,mantissa bits"),
    cliutils.arg("--exponent-bias", dest="exponent_bias", type=int,
                 default=None,
                 help="Exponent bias, defaults to 17 for [1,5,2]"),
]

_output_dir_arg = cliutils.arg(
    "--output-dir", dest="output_dir", default=None,
    help="Directory for default output files. Defaults to "
         "env[%s], then to [output] output_dir" % OUTPUT_DIR_ENV)


class BaseCommand(object):
    group_name = None


class AnalysisCommands(BaseCommand):
    group_name = "analysis"

    @cliutils.arg("--out", dest="file_name", help="Grid CSV file, "
                  "printed when omitted")
    @cliutils.args(*_format_args)
    def grid(self, args):
        """Write the quantization grid audit CSV."""
        grid = quantizer.build_grid(_format(args))
        text = _utils.render(quantizer.dump_grid, grid)
        if args.file_name:
            _utils.atomic_write(args.file_name, text)
            LOG.info("Wrote %s", args.file_name)
        else:
            print(text, end="")

    @cliutils.arg("input", help="GTF file with gradient records")
    @cliutils.arg("--out", dest="file_name",
                  help="Fit report CSV, defaults to fits.csv in the output "
                       "directory")
    @cliutils.arg("--histogram", dest="histogram",
                  help="Also write sample and fitted densities to this CSV")
    @cliutils.arg("--bins", dest="bins", type=int, default=50,
                  help="Histogram bins per record")
    @cliutils.arg("--json", dest="use_json", action="store_true",
                  help="Print the summary in JSON")
    @_output_dir_arg
    def fit(self, args):
        """Fit GenNorm and normal models to every record of a GTF file."""
        reports, rows = [], []
        for record in _read_records(args.input):
            report = stats.fit_report(record.values, record.epoch,
                                      record.layer_label)
            reports.append(report)
            if args.histogram:
                for row in stats.histogram(record.values,
                                           report.gennorm_params,
                                           report.norm_params,
                                           bins=args.bins):
                    rows.append((record.layer_label, record.epoch, row))

        path = _output_path(args, "fits.csv")
        outputs = [(path, _utils.render(stats.write_fit_reports, reports))]
        if args.histogram:
            outputs.append((args.histogram,
                            _utils.render(_write_histograms, rows)))
        _utils.atomic_write_many(outputs)
        for out_path, _text in outputs:
            LOG.info("Wrote %s", out_path)

        summary = [{"layer": r.layer_label, "epoch": r.epoch,
                    "mu": r.gennorm_params.mu,
                    "alpha": r.gennorm_params.alpha,
                    "beta": r.gennorm_params.beta,
                    "w2_gennorm": r.w2_gennorm, "w2_norm": r.w2_norm,
                    "kurtosis": r.sample_kurtosis} for r in reports]
        if args.use_json:
            _print_json(summary)
        else:
            _print_table(("layer", "epoch", "beta", "w2_gennorm", "w2_norm",
                          "kurtosis"),
                         [(s["layer"], s["epoch"], "%.4f" % s["beta"],
                           "%.4g" % s["w2_gennorm"], "%.4g" % s["w2_norm"],
                           "%.4f" % s["kurtosis"]) for s in summary])


def _write_histograms(rows, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(("layer", "epoch") + stats.HISTOGRAM_FIELDS)
    for layer, epoch, row in rows:
        writer.writerow([layer, epoch] + [repr(v) for v in
                                          dataclasses.astuple(row)])


class CodingCommands(BaseCommand):
    group_name = "coding"

    @cliutils.arg("input", help="GTF file with gradient records")
    @cliutils.arg("--out", dest="file_name",
                  help="Compressed output, defaults to <input name>.gcf in "
                       "the output directory")
    @cliutils.arg("--model", dest="model", default="gennorm",
                  choices=["gennorm", "norm", "empirical"],
                  help="Probability model of the Huffman code")
    @cliutils.arg("--coder", dest="coder", default="huffman",
                  choices=["huffman", "lz78"],
                  help="Symbol coder")
    @cliutils.arg("--json", dest="use_json", action="store_true",
                  help="Print the summary in JSON")
    @_output_dir_arg
    @cliutils.args(*_format_args)
    def compress(self, args):
        """Quantize and entropy code every record of a GTF file."""
        grid = quantizer.build_grid(_format(args))
        spec = "lz78" if args.coder == "lz78" else "huffman-" + args.model
        coder = base.get_coder(spec, grid)

        frames, summary = [], []
        for record in _read_records(args.input):
            values = record.values.astype("float64")
            stream = quantizer.quantize(values, grid)
            blob = coder.encode(stream, values)
            frames.append(records.CompressedFrame(
                record.layer_label, record.epoch, record.shape, blob))
            bps = blob.bit_length / len(stream) if len(stream) else 0.0
            summary.append({"layer": record.layer_label,
                            "epoch": record.epoch,
                            "symbols": len(stream),
                            "payload_bits": blob.bit_length,
                            "header_bits": blob.header_bits,
                            "bits_per_symbol": bps})

        name = os.path.splitext(os.path.basename(args.input))[0] + ".gcf"
        path = _output_path(args, name)
        records.write_frames(path, frames)
        LOG.info("Wrote %s", path)

        symbols = sum(s["symbols"] for s in summary)
        payload = sum(s["payload_bits"] for s in summary)
        total = {"coder": spec, "output": path, "records": summary,
                 "bits_per_symbol": payload / symbols if symbols else 0.0}
        if args.use_json:
            _print_json(total)
        else:
            _print_table(("layer", "epoch", "symbols", "payload bits",
                          "header bits", "bits/symbol"),
                         [(s["layer"], s["epoch"], s["symbols"],
                           s["payload_bits"], s["header_bits"],
                           "%.4f" % s["bits_per_symbol"]) for s in summary])
            print("%s: %.4f bits/symbol" % (spec, total["bits_per_symbol"]))

    @cliutils.arg("input", help="Compressed file written by compress")
    @cliutils.arg("--out", dest="file_name",
                  help="GTF output, defaults to <input name>.dequantized.gtf "
                       "in the output directory")
    @_output_dir_arg
    def decompress(self, args):
        """Rebuild a GTF file of bin centers from a compressed file."""
        rebuilt = []
        try:
            frames = list(records.iter_frames(args.input))
        except OSError as e:
            raise exc.InputError("can not read %s: %s"
                                 % (args.input, e.strerror))
        for frame in frames:
            coder = base.get_coder_for_blob(frame.blob)
            stream = coder.decode(frame.blob)
            values = quantizer.dequantize(stream, stream.grid)
            rebuilt.append(records.GradientRecord(
                frame.layer_label, frame.epoch, frame.shape, values))

        # NOTE: never default to <name>.gtf, that is usually the original
        # full-precision file the compressed one was made from.
        name = (os.path.splitext(os.path.basename(args.input))[0]
                + DEQUANTIZED_SUFFIX)
        path = _output_path(args, name)
        records.write_records(path, rebuilt)
        LOG.info("Wrote %s", path)
        print("Decoded %d records into %s" % (len(rebuilt), path))


class BenchCommands(BaseCommand):
    group_name = "bench"

    @cliutils.arg("--config-file", dest="config_file",
                  help="Experiment configuration in INI format, see "
                       "etc/gradzip/bench.conf")
    @cliutils.arg("--seed", dest="seed", type=int, default=None,
                  help="Override [harness] seed")
    @cliutils.arg("--rounds", dest="rounds", type=int, default=None,
                  help="Override [harness] rounds")
    @cliutils.arg("--coders", dest="coders", default=None,
                  help="Override [coder] coders, comma separated")
    @cliutils.arg("--accuracy", dest="accuracy", action="store_true",
                  help="Also run the paired accuracy comparison")
    @cliutils.arg("--json", dest="use_json", action="store_true",
                  help="Print the summary in JSON")
    @_output_dir_arg
    def bench(self, args):
        """Run the federated experiment and write its CSV reports."""
        conf = cfg.ConfigOpts()
        opts.register_opts(conf)
        files = [args.config_file] if args.config_file else []
        for path in files:
            if not os.path.isfile(path):
                raise exc.InputError("config file %s does not exist" % path)
        try:
            conf([], project="gradzip", default_config_files=files,
                 default_config_dirs=[])
            config = federated.ExperimentConfig.from_conf(conf)
        except cfg.Error as e:
            raise exc.CommandError("invalid configuration: %s" % e)

        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.rounds is not None:
            overrides["rounds"] = args.rounds
        if args.coders:
            overrides["coders"] = tuple(_utils.split(args.coders))
        if args.accuracy:
            overrides["accuracy_comparison"] = True
        if overrides:
            config = dataclasses.replace(config, **overrides)

        result = federated.run_experiment(config)
        written = federated.write_outputs(result, _output_dir(args, conf))

        ledger = result.ledger
        summary = {"outputs": written, "coders": {}}
        for spec in config.coders:
            bps = ledger.bits_per_symbol(spec)
            summary["coders"][spec] = {
                "payload_bits": ledger.payload_bits(spec),
                "header_bits": ledger.header_bits(spec),
                "expected_bits": ledger.expected_bits(spec),
                "bits_per_symbol": bps,
                "compression_ratio": 8.0 / bps if bps else None}
        if result.reports:
            summary["final_accuracy"] = result.reports[-1].accuracy
            summary["final_loss"] = result.reports[-1].loss
        if args.use_json:
            _print_json(summary)
        else:
            _print_table(("coder", "payload bits", "header bits",
                          "bits/symbol", "ratio"),
                         [(spec, c["payload_bits"], c["header_bits"],
                           "%.4f" % c["bits_per_symbol"],
                           "%.3f" % c["compression_ratio"]
                           if c["compression_ratio"] else "-")
                          for spec, c in summary["coders"].items()])
