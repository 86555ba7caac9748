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


class GradzipException(Exception):
    """Unexpected gradzip failure."""

    exit_code = 1

    def __init__(self, message=None):
        super(GradzipException, self).__init__(message)
        self.message = message

    def __str__(self):
        return self.message or self.__class__.__doc__


class CommandError(GradzipException):
    """Invalid usage of CLI."""

    exit_code = 2


class ParameterError(GradzipException):
    """Distribution parameters are outside of their domain."""


class InputError(GradzipException):
    """Input data does not satisfy the operation preconditions."""

    def __init__(self, message=None, position=None):
        super(InputError, self).__init__(message)
        self.position = position


class CodingError(GradzipException):
    """Symbol stream can not be coded with the given codebook."""


class FormatError(GradzipException):
    """Malformed container or blob."""

    exit_code = 3

    def __init__(self, message=None, offset=None):
        if offset is not None:
            message = "%s (byte offset %d)" % (message, offset)
        super(FormatError, self).__init__(message)
        self.offset = offset


class CorruptionError(GradzipException):
    """Compressed data failed an integrity or decodability check."""

    exit_code = 4

    def __init__(self, message=None, offset=None, unit="bit"):
        if offset is not None:
            message = "%s (%s offset %d)" % (message, unit, offset)
        super(CorruptionError, self).__init__(message)
        self.offset = offset


class FitError(GradzipException):
    """Distribution fit failed."""

    exit_code = 5

    def __init__(self, message=None, diagnostics=None):
        super(FitError, self).__init__(message)
        self.diagnostics = diagnostics or {}
