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

from oslo_config import cfg

from gradzip.coders import pmf
from gradzip import quantizer

__all__ = [
    "list_opts",
    "set_defaults",
]

_quantizer_opt_group = cfg.OptGroup(
    "quantizer",
    title="Gradient quantization format",
    help="""
Layout of the emulated 8-bit float whose representable values are the bin
edges gradients are quantized to.
""")

_sign_bits_opt = cfg.IntOpt(
    "sign_bits",
    default=1,
    min=1,
    max=1,
    help="""
Number of sign bits. Only one sign bit is supported.
""")

_exponent_bits_opt = cfg.IntOpt(
    "exponent_bits",
    default=5,
    min=2,
    max=7,
    help="""
Number of exponent bits. Sign, exponent and mantissa bits must add up to 8.
""")

_mantissa_bits_opt = cfg.IntOpt(
    "mantissa_bits",
    default=2,
    min=0,
    max=5,
    help="""
Number of mantissa bits.
""")

_exponent_bias_opt = cfg.IntOpt(
    "exponent_bias",
    default=17,
    min=0,
    max=255,
    help="""
Exponent bias. Normal values are (1 + m / 2**mantissa_bits) *
2**(code - exponent_bias). With the default [1,5,2] layout a bias of 17 puts
the smallest positive edge at 2**-16, the top anchor sits at 2**15.
""")

_coder_opt_group = cfg.OptGroup(
    "coder",
    title="Lossless symbol coders",
    help="""
Entropy coders applied to quantized gradient streams.
""")

_pmf_floor_opt = cfg.FloatOpt(
    "pmf_floor",
    default=pmf.PMF_FLOOR,
    min=0.0,
    help="""
Smallest probability given to any bin before renormalization, so that every
symbol stays encodable when a fitted model assigns it negligible mass.
""")

_coders_opt = cfg.ListOpt(
    "coders",
    default=["lz78", "huffman-gennorm", "huffman-norm"],
    help="""
Coders to run on every layer stream.

Possible values:

* ``lz78`` - LZ78 dictionary coding, needs no model.
* ``huffman-gennorm`` - Huffman code from a generalized normal fit.
* ``huffman-norm`` - Huffman code from a normal fit.
* ``huffman-empirical`` - Huffman code from the stream's own frequencies.
""")

_harness_opt_group = cfg.OptGroup(
    "harness",
    title="Federated averaging experiment",
    help="""
Toy federated training used to generate gradient streams: a two layer MLP
trained on Gaussian class blobs spread over several users.
""")

_users_opt = cfg.IntOpt("users", default=4, min=1,
                        help="Number of users taking part in every round.")
_rounds_opt = cfg.IntOpt("rounds", default=50, min=0,
                         help="Number of training rounds.")
_input_dim_opt = cfg.IntOpt("input_dim", default=20, min=1,
                            help="Input feature dimension.")
_hidden_dim_opt = cfg.IntOpt("hidden_dim", default=32, min=1,
                             help="Width of the hidden ReLU layer.")
_classes_opt = cfg.IntOpt("classes", default=2, min=2,
                          help="Number of classes.")
_samples_per_user_opt = cfg.IntOpt(
    "samples_per_user", default=200, min=1,
    help="Training samples held by every user.")
_test_samples_opt = cfg.IntOpt("test_samples", default=1000, min=1,
                               help="Size of the held-out test set.")
_blob_separation_opt = cfg.FloatOpt(
    "blob_separation", default=3.0, min=0.0,
    help="""
Distance of every class mean from the origin, in units of the unit blob
standard deviation.
""")
_batch_size_opt = cfg.IntOpt(
    "batch_size", default=0, min=0,
    help="""
Minibatch size for local gradients. A user's gradient is the average of its
minibatch gradients over the round. 0 uses the whole shard as one batch.
""")
_learning_rate_opt = cfg.FloatOpt("learning_rate", default=0.01,
                                  help="Server step size.")
_seed_opt = cfg.IntOpt("seed", default=0, min=0,
                       help="Seed of every random choice of the run.")
_workers_opt = cfg.IntOpt(
    "workers", default=1, min=1,
    help="""
Threads used for per-user gradients and per-layer coding within a round.
Results do not depend on this value.
""")
_accuracy_comparison_opt = cfg.BoolOpt(
    "accuracy_comparison", default=False,
    help="""
Also train a full-precision arm next to a quantized arm with the same seed
and record both loss and accuracy curves.
""")

_output_opt_group = cfg.OptGroup(
    "output",
    title="Experiment outputs",
    help="Where CSV outputs are written.")

_output_dir_opt = cfg.StrOpt(
    "output_dir",
    default=".",
    help="""
Directory receiving ledger.csv, rounds.csv, fits.csv and accuracy.csv.
""")

_QUANTIZER_OPTS = [
    _sign_bits_opt,
    _exponent_bits_opt,
    _mantissa_bits_opt,
    _exponent_bias_opt,
]

_CODER_OPTS = [
    _pmf_floor_opt,
    _coders_opt,
]

_HARNESS_OPTS = [
    _users_opt,
    _rounds_opt,
    _input_dim_opt,
    _hidden_dim_opt,
    _classes_opt,
    _samples_per_user_opt,
    _test_samples_opt,
    _blob_separation_opt,
    _batch_size_opt,
    _learning_rate_opt,
    _seed_opt,
    _workers_opt,
    _accuracy_comparison_opt,
]

_OUTPUT_OPTS = [
    _output_dir_opt,
]

_GROUPS = [
    (_quantizer_opt_group, _QUANTIZER_OPTS),
    (_coder_opt_group, _CODER_OPTS),
    (_harness_opt_group, _HARNESS_OPTS),
    (_output_opt_group, _OUTPUT_OPTS),
]


def register_opts(conf):
    for group, options in _GROUPS:
        conf.register_group(group)
        conf.register_opts(options, group=group)


register_opts(cfg.CONF)


def set_defaults(conf, coders=None, rounds=None, users=None, seed=None,
                 output_dir=None):
    register_opts(conf)

    if coders is not None:
        conf.set_default("coders", coders,
                         group=_coder_opt_group.name)
    if rounds is not None:
        conf.set_default("rounds", rounds,
                         group=_harness_opt_group.name)
    if users is not None:
        conf.set_default("users", users,
                         group=_harness_opt_group.name)
    if seed is not None:
        conf.set_default("seed", seed,
                         group=_harness_opt_group.name)
    if output_dir is not None:
        conf.set_default("output_dir", output_dir,
                         group=_output_opt_group.name)


def get_format(conf=None):
    """Fp8Format described by the [quantizer] group."""
    if conf is None:
        conf = cfg.CONF
    group = conf.quantizer
    return quantizer.Fp8Format(group.sign_bits, group.exponent_bits,
                               group.mantissa_bits, group.exponent_bias)


def list_opts():
    return [(group.name, options) for group, options in _GROUPS]
