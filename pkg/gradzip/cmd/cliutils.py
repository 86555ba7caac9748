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

import os


def env(*names, default=""):
    """Returns the value of the first environment variable that is set.

    Empty values count as unset.
    """
    for name in names:
        value = os.environ.get(name)
        if value:
            return value
    return default


def first_set(*candidates, default=None):
    """First candidate that is neither None nor empty.

    Callables are only evaluated when every earlier candidate is unset,
    so lookups such as config access happen lazily.
    """
    for candidate in candidates:
        value = candidate() if callable(candidate) else candidate
        if value:
            return value
    return default


def arg(*args, **kwargs):
    """Decorator for CLI args.

    Example:

    >>> @arg("input", help="GTF file with gradient records")
        ... def fit(self, args):
        ... pass
    """
    def _decorator(func):
        add_arg(func, *args, **kwargs)
        return func
    return _decorator


def args(*decorators):
    """Apply a group of :func:`arg` decorators in their listed order."""
    def _decorator(func):
        for decorator in reversed(decorators):
            func = decorator(func)
        return func
    return _decorator


def add_arg(func, *args, **kwargs):
    """Bind CLI arguments to a command method."""

    if not hasattr(func, "arguments"):
        func.arguments = []

    # NOTE: shared groups such as the --format pair are applied to
    # several commands, never register one twice on the same command.
    if (args, kwargs) not in func.arguments:
        # Decorators apply bottom-up, insert at the front to keep the
        # declaration order of positional arguments.
        func.arguments.insert(0, (args, kwargs))
