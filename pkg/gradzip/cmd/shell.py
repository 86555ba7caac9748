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

"""
Gradient quantization, model fitting and entropy coding toolkit.
"""

import argparse
import inspect
import logging
import sys

from oslo_config import cfg

import gradzip
from gradzip.cmd import commands
from gradzip import exc
from gradzip import opts


class GradzipShell(object):

    def __init__(self, argv):
        args = self._get_base_parser().parse_args(argv)
        opts.set_defaults(cfg.CONF)
        self._setup_logging(args.debug)

        args.func(args)

    def _setup_logging(self, debug):
        logging.basicConfig(
            stream=sys.stderr,
            level=logging.DEBUG if debug else logging.WARNING,
            format="%(asctime)s %(levelname)s %(name)s %(message)s")

    def _get_base_parser(self):
        parser = argparse.ArgumentParser(
            prog="gradzip",
            description=__doc__.strip(),
            add_help=True
        )

        parser.add_argument("-v", "--version",
                            action="version",
                            version=gradzip.__version__)
        parser.add_argument("--debug", action="store_true", default=False,
                            help="Log debugging output to stderr")

        self._append_subcommands(parser)

        return parser

    def _append_subcommands(self, parent_parser):
        subcommands = parent_parser.add_subparsers(help="<subcommands>",
                                                   dest="command")
        subcommands.required = True
        for group_cls in commands.BaseCommand.__subclasses__():
            for name, callback in inspect.getmembers(
                    group_cls(), predicate=inspect.ismethod):
                if name.startswith("_"):
                    continue
                command = name.replace("_", "-")
                desc = callback.__doc__ or ""
                help_message = desc.strip().split("\n")[0]
                arguments = getattr(callback, "arguments", [])

                command_parser = subcommands.add_parser(
                    command, help=help_message, description=desc)
                for (args, kwargs) in arguments:
                    command_parser.add_argument(*args, **kwargs)
                command_parser.set_defaults(func=callback)


def main(args=None):
    if args is None:
        args = sys.argv[1:]

    try:
        GradzipShell(args)
    except exc.GradzipException as e:
        print("%s: %s" % (e.__class__.__name__, e), file=sys.stderr)
        return e.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
