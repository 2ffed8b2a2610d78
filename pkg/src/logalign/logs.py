"""Event logs: label interning, XES parsing/writing, trace projection.

Only the ``concept:name`` attribute of each event is read; everything else
in an XES document is ignored.  A plain-text fallback format (one trace per
line, comma-separated labels) is supported for fixtures.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import XesParseError, XesValidationError

TAU = 0
TAU_TEXT = "τ"


class LabelTable:
    """Bijective interning of activity names to small integer ids.

    Id 0 is reserved for the silent label and never assigned to an event.
    """

    def __init__(self):
        self._texts: list[str] = [TAU_TEXT]
        self._ids: dict[str, int] = {TAU_TEXT: TAU}

    def intern(self, text: str) -> int:
        if text == TAU_TEXT:
            raise XesValidationError("the silent label %r is reserved and may not name an event" % text)
        lid = self._ids.get(text)
        if lid is None:
            lid = len(self._texts)
            self._texts.append(text)
            self._ids[text] = lid
        return lid

    def text(self, lid: int) -> str:
        return self._texts[lid]

    def lookup(self, text: str) -> Optional[int]:
        return self._ids.get(text)

    def __len__(self) -> int:
        return len(self._texts)

    def is_tau(self, lid: int) -> bool:
        return lid == TAU

    def visible_ids(self) -> list[int]:
        return list(range(1, len(self._texts)))

    def rank(self) -> dict[int, int]:
        """Map label id -> position under lexicographic order of the texts.

        The silent label sorts before every visible label.
        """
        order = sorted(range(1, len(self._texts)), key=lambda i: self._texts[i])
        ranks = {TAU: 0}
        for pos, lid in enumerate(order, start=1):
            ranks[lid] = pos
        return ranks


@dataclass(frozen=True)
class Trace:
    labels: tuple[int, ...]
    frequency: int = 1

    def __len__(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class EventLog:
    """Deduplicated event log over an interned alphabet.

    ``traces`` holds one entry per distinct label sequence, sorted by the
    label texts so that downstream output is reproducible.
    """

    traces: tuple[Trace, ...]
    alphabet: frozenset[int]
    total_traces: int
    total_events: int
    table: LabelTable

    def texts(self, trace: Trace) -> tuple[str, ...]:
        return tuple(self.table.text(l) for l in trace.labels)

    def trace_key(self, trace: Trace) -> tuple[str, ...]:
        return self.texts(trace)


def make_log(sequences: Iterable[tuple[int, ...] | list[int]], table: LabelTable,
             frequencies: Optional[Iterable[int]] = None) -> EventLog:
    """Build a deduplicated EventLog from raw label-id sequences."""
    counts: dict[tuple[int, ...], int] = {}
    if frequencies is None:
        for seq in sequences:
            counts[tuple(seq)] = counts.get(tuple(seq), 0) + 1
    else:
        for seq, f in zip(sequences, frequencies):
            counts[tuple(seq)] = counts.get(tuple(seq), 0) + f
    traces = tuple(
        Trace(seq, counts[seq])
        for seq in sorted(counts, key=lambda s: tuple(table.text(l) for l in s))
    )
    alphabet = frozenset(l for t in traces for l in t.labels)
    total_traces = sum(t.frequency for t in traces)
    total_events = sum(t.frequency * len(t.labels) for t in traces)
    return EventLog(traces, alphabet, total_traces, total_events, table)


def log_from_texts(sequences: Iterable[Iterable[str]], table: Optional[LabelTable] = None) -> EventLog:
    table = table if table is not None else LabelTable()
    return make_log([tuple(table.intern(x) for x in seq) for seq in sequences], table)


def _localname(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def parse_xes(data: bytes | str, table: Optional[LabelTable] = None) -> EventLog:
    """Parse an XES document into a deduplicated EventLog.

    Duplicate trace sequences are merged and their frequencies summed.
    Raises XesParseError on malformed XML and XesValidationError when a
    trace contains an event without a concept:name attribute.
    """
    table = table if table is not None else LabelTable()
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise XesParseError("malformed XES document: %s" % exc) from exc
    sequences = []
    trace_index = 0
    for elem in root.iter():
        if _localname(elem.tag) != "trace":
            continue
        labels = []
        for ev in elem:
            if _localname(ev.tag) != "event":
                continue
            name = None
            for attr in ev.iter():
                if attr.get("key") == "concept:name":
                    name = attr.get("value")
                    break
            if name is None:
                raise XesValidationError(
                    "trace %d: event %d has no concept:name attribute" % (trace_index, len(labels))
                )
            labels.append(table.intern(name))
        sequences.append(tuple(labels))
        trace_index += 1
    return make_log(sequences, table)


def write_xes(log: EventLog) -> str:
    """Serialize an EventLog back to XES, one trace element per occurrence."""
    out = ['<?xml version="1.0" encoding="UTF-8"?>', '<log xes.version="1.0">']
    for trace in log.traces:
        for _ in range(trace.frequency):
            out.append("  <trace>")
            for lid in trace.labels:
                out.append('    <event><string key="concept:name" value="%s"/></event>'
                           % _xml_escape(log.table.text(lid)))
            out.append("  </trace>")
    out.append("</log>")
    return "\n".join(out)


def _xml_escape(s: str) -> str:
    return (s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;"))


def parse_text_log(data: str, table: Optional[LabelTable] = None) -> EventLog:
    """Fixture format: one trace per line, comma-separated labels."""
    table = table if table is not None else LabelTable()
    sequences = []
    for line in data.splitlines():
        line = line.strip()
        if not line:
            continue
        sequences.append(tuple(table.intern(x.strip()) for x in line.split(",") if x.strip()))
    return make_log(sequences, table)


def project_trace(trace: Trace, alphabet: frozenset[int] | set[int]) -> Trace:
    """Subsequence of the trace keeping exactly the labels in ``alphabet``."""
    return Trace(tuple(l for l in trace.labels if l in alphabet), trace.frequency)


def project_log(log: EventLog, alphabet: frozenset[int] | set[int]) -> EventLog:
    """Project every trace and re-deduplicate."""
    return make_log([project_trace(t, alphabet).labels for t in log.traces],
                    log.table, frequencies=[t.frequency for t in log.traces])
