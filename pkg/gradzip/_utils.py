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

import io
import os

from oslo_utils import encodeutils
from oslo_utils import fileutils


def split(text, strip=True):
    """Splits a comma separated text blob into its components.

    Does nothing if already a list or tuple.
    """
    if isinstance(text, (tuple, list)):
        return text
    if not isinstance(text, str):
        raise TypeError("Unknown how to split '%s': %s" % (text, type(text)))
    if strip:
        return [t.strip() for t in text.split(",") if t.strip()]
    else:
        return text.split(",")


def itersubclasses(cls, _seen=None):
    """Generator over all subclasses of a given class in depth first order."""

    _seen = _seen or set()
    try:
        subs = cls.__subclasses__()
    except TypeError:   # fails only when cls is type
        subs = cls.__subclasses__(cls)
    for sub in subs:
        if sub not in _seen:
            _seen.add(sub)
            yield sub
            for sub in itersubclasses(sub, _seen):
                yield sub


def _stage(path, data):
    directory = os.path.dirname(os.path.abspath(path))
    fileutils.ensure_tree(directory)
    if isinstance(data, str):
        data = encodeutils.safe_encode(data)
    return fileutils.write_to_tempfile(data, path=directory, suffix=".tmp",
                                       prefix=".gradzip-")


def atomic_write_many(outputs):
    """Write several files, touching no destination before every payload
    is on disk.

    Every payload goes to a temporary file next to its destination first
    and the renames only start once all temporary files exist. Leftover
    temporary files are removed on failure.

    :param outputs: iterable of (path, bytes or text) pairs
    """
    staged = []
    try:
        for path, data in outputs:
            staged.append((_stage(path, data), path))
        while staged:
            tmp, path = staged[0]
            os.replace(tmp, path)
            staged.pop(0)
    finally:
        for tmp, _path in staged:
            fileutils.delete_if_exists(tmp)


def atomic_write(path, data):
    """Write bytes or text to path through a temporary file."""
    atomic_write_many([(path, data)])


def render(write, *args, **kwargs):
    """Call a ``write(..., stream)`` style function and return its text."""
    stream = io.StringIO()
    write(*args, stream=stream, **kwargs)
    return stream.getvalue()