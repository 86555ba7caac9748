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

"""Up-link communication overhead bookkeeping."""

import collections
import csv
import dataclasses

from oslo_concurrency.lockutils import synchronized

from gradzip import exc


LEDGER_FIELDS = ("round", "user", "layer", "coder", "payload_bits",
                 "header_bits", "symbols", "expected_bits")


@dataclasses.dataclass(frozen=True)
class LedgerEntry(object):
    """Cost of one coded layer stream of one user in one round.

    ``expected_bits`` is the symbol count times the expected code length
    under the model the code was built from; for coders without a model it
    equals the payload bits.
    """

    round: int
    user: int
    layer: str
    coder: str
    payload_bits: int
    header_bits: int
    symbols: int
    expected_bits: float

    def __post_init__(self):
        if min(self.payload_bits, self.header_bits, self.symbols) < 0:
            raise exc.InputError("ledger counts must be nonnegative")

    @property
    def total_bits(self):
        return self.payload_bits + self.header_bits

    @property
    def bits_per_symbol(self):
        if not self.symbols:
            return 0.0
        return self.payload_bits / self.symbols

    def as_row(self):
        return (self.round, self.user, self.layer, self.coder,
                self.payload_bits, self.header_bits, self.symbols,
                repr(float(self.expected_bits)))


class OverheadLedger(object):
    """Every coded stream of an experiment, in commit order.

    Totals are sums over rounds and users, separately per coder; header
    bits are kept apart from payload bits.
    """

    def __init__(self):
        self._entries = []

    @synchronized("gradzip-ledger-commit")
    def commit(self, entries):
        """Append one round worth of entries.

        :raises InputError: when a round older than the last committed one
                            is committed
        """
        entries = list(entries)
        if entries and self._entries:
            last = self._entries[-1].round
            if min(e.round for e in entries) < last:
                raise exc.InputError("round %d committed after round %d"
                                     % (min(e.round for e in entries), last))
        self._entries.extend(entries)

    @property
    def entries(self):
        return tuple(self._entries)

    def __len__(self):
        return len(self._entries)

    def coders(self):
        return sorted({e.coder for e in self._entries})

    def rounds(self):
        return sorted({e.round for e in self._entries})

    def _select(self, coder=None, layer=None, round=None):
        for entry in self._entries:
            if coder is not None and entry.coder != coder:
                continue
            if layer is not None and entry.layer != layer:
                continue
            if round is not None and entry.round != round:
                continue
            yield entry

    def payload_bits(self, coder=None, **filters):
        return sum(e.payload_bits for e in self._select(coder, **filters))

    def header_bits(self, coder=None, **filters):
        return sum(e.header_bits for e in self._select(coder, **filters))

    def expected_bits(self, coder=None, **filters):
        return float(sum(e.expected_bits
                         for e in self._select(coder, **filters)))

    def symbols(self, coder=None, **filters):
        return sum(e.symbols for e in self._select(coder, **filters))

    def total_bits(self, coder=None, include_header=True, **filters):
        total = self.payload_bits(coder, **filters)
        if include_header:
            total += self.header_bits(coder, **filters)
        return total

    def bits_per_symbol(self, coder, **filters):
        symbols = self.symbols(coder, **filters)
        if not symbols:
            return 0.0
        return self.payload_bits(coder, **filters) / symbols

    def cumulative_bits(self, coder):
        """Running payload total after every round, nondecreasing."""
        per_round = collections.OrderedDict((r, 0) for r in self.rounds())
        for entry in self._select(coder):
            per_round[entry.round] += entry.payload_bits
        running, result = 0, []
        for round_index, bits in per_round.items():
            running += bits
            result.append((round_index, running))
        return result


def write_ledger(ledger, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(LEDGER_FIELDS)
    for entry in ledger.entries:
        writer.writerow(entry.as_row())
