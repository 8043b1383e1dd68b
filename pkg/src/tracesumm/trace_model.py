"""Multidimensional trace data model and event-log ingestion.

Every event carries one integer code per schema attribute; the codes index
into per-attribute value dictionaries built in first-seen order.  Traces are
stored as ``(m, n_attributes)`` integer arrays so that downstream modules can
project them onto attribute subsets without touching strings again.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from dataclasses import dataclass, field
from datetime import datetime
from functools import cached_property
from typing import IO, Iterable, Sequence
from xml.parsers import expat

import numpy as np

from .errors import EmptyInputError, RowError, SchemaError, UnknownTraceError, XESParseError

__all__ = [
    "MISSING",
    "AttributeSchema",
    "Trace",
    "TraceSet",
    "parse_csv_log",
    "parse_xes_log",
    "project_symbols",
    "composite_alphabet",
    "encode_trace",
    "write_csv",
    "dump_jsonl",
    "load_jsonl",
]

#: Value used for events that lack a configured attribute.
MISSING = "<missing>"

CODE_DTYPE = np.int32


@dataclass(frozen=True)
class AttributeSchema:
    """Ordered attribute names with one value dictionary per attribute.

    ``values[k][c]`` is the string value encoded by code ``c`` of attribute
    ``attributes[k]``.
    """

    attributes: tuple[str, ...]
    values: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        attrs = tuple(self.attributes)
        values = tuple(tuple(v) for v in self.values)
        object.__setattr__(self, "attributes", attrs)
        object.__setattr__(self, "values", values)
        if len(attrs) == 0:
            raise SchemaError("schema needs at least one attribute")
        if any(not a for a in attrs):
            raise SchemaError("attribute names must be non-empty")
        if len(set(attrs)) != len(attrs):
            raise SchemaError(f"duplicate attribute names in {attrs}")
        if len(values) != len(attrs):
            raise SchemaError("one value dictionary per attribute is required")
        for name, vals in zip(attrs, values):
            if len(set(vals)) != len(vals):
                raise SchemaError(f"attribute {name!r} has duplicate values")

    @cached_property
    def _lookup(self):
        return tuple({v: i for i, v in enumerate(vals)} for vals in self.values)

    def index(self, attribute: str) -> int:
        try:
            return self.attributes.index(attribute)
        except ValueError:
            raise SchemaError(f"unknown attribute {attribute!r}") from None

    def cardinality(self, attribute: str) -> int:
        return len(self.values[self.index(attribute)])

    def code(self, attribute: str, value: str) -> int:
        k = self.index(attribute)
        try:
            return self._lookup[k][value]
        except KeyError:
            raise SchemaError(f"value {value!r} not in dictionary of {attribute!r}") from None

    def decode(self, attribute: str, code: int) -> str:
        return self.values[self.index(attribute)][code]

    def to_dict(self) -> dict:
        return {"attributes": list(self.attributes), "values": [list(v) for v in self.values]}


@dataclass(frozen=True)
class Trace:
    """One process instance; row ``i`` of ``events`` is the event at position ``i + 1``."""

    id: str
    events: np.ndarray

    def __post_init__(self):
        ev = np.array(self.events, dtype=CODE_DTYPE, copy=True)
        if ev.ndim != 2:
            raise SchemaError(f"trace {self.id!r}: events must be a 2-D code array")
        if ev.shape[0] == 0:
            raise EmptyInputError(f"trace {self.id!r} has no events")
        ev.setflags(write=False)
        object.__setattr__(self, "events", ev)

    def __len__(self):
        return self.events.shape[0]

    def event(self, position: int) -> tuple[int, ...]:
        """Codes of the event at 1-based ``position``."""
        if not 1 <= position <= len(self):
            raise IndexError(position)
        return tuple(int(c) for c in self.events[position - 1])

    def __eq__(self, other):
        if not isinstance(other, Trace):
            return NotImplemented
        return self.id == other.id and np.array_equal(self.events, other.events)

    def __hash__(self):
        return hash((self.id, self.events.tobytes()))


@dataclass(frozen=True)
class TraceSet:
    """A corpus of traces sharing one :class:`AttributeSchema`."""

    schema: AttributeSchema
    traces: tuple[Trace, ...] = field(default=())

    def __post_init__(self):
        traces = tuple(self.traces)
        object.__setattr__(self, "traces", traces)
        n_attr = len(self.schema.attributes)
        cards = np.array([len(v) for v in self.schema.values])
        seen = set()
        for t in traces:
            if t.id in seen:
                raise SchemaError(f"duplicate trace id {t.id!r}")
            seen.add(t.id)
            if t.events.shape[1] != n_attr:
                raise SchemaError(
                    f"trace {t.id!r} has {t.events.shape[1]} attributes, schema has {n_attr}"
                )
            if (t.events < 0).any() or (t.events >= cards).any():
                raise SchemaError(f"trace {t.id!r} holds codes outside the schema dictionaries")

    def __len__(self):
        return len(self.traces)

    def __iter__(self):
        return iter(self.traces)

    def __getitem__(self, key):
        if isinstance(key, str):
            return self.traces[self.position(key)]
        return self.traces[key]

    @cached_property
    def _positions(self):
        return {t.id: i for i, t in enumerate(self.traces)}

    def position(self, trace_id: str) -> int:
        try:
            return self._positions[trace_id]
        except KeyError:
            raise UnknownTraceError(f"no trace with id {trace_id!r}") from None

    @property
    def ids(self) -> list[str]:
        return [t.id for t in self.traces]

    def subset(self, indices: Iterable[int]) -> "TraceSet":
        return TraceSet(self.schema, tuple(self.traces[i] for i in indices))

    @cached_property
    def digest(self) -> str:
        """Content hash; equal corpora produce equal digests."""
        h = hashlib.sha1()
        h.update(json.dumps(self.schema.to_dict(), sort_keys=True).encode())
        for t in self.traces:
            h.update(t.id.encode())
            h.update(b"\0")
            h.update(np.ascontiguousarray(t.events).tobytes())
            h.update(str(t.events.shape).encode())
        return h.hexdigest()


# --------------------------------------------------------------------------
# ingestion
# --------------------------------------------------------------------------


def _open_binary(source):
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return fh.read()
    if isinstance(source, (bytes, bytearray)):
        return bytes(source)
    data = source.read()
    return data.encode("utf-8") if isinstance(data, str) else data


class _Interner:
    def __init__(self):
        self.codes = {}

    def __call__(self, value):
        code = self.codes.get(value)
        if code is None:
            code = self.codes[value] = len(self.codes)
        return code

    @property
    def values(self):
        return tuple(self.codes)


def _order_key(raw, kind, line):
    raw = raw.strip()
    if kind == "int":
        try:
            return int(raw)
        except ValueError:
            raise RowError(f"ordering value {raw!r} is not an integer", line) from None
    try:
        ts = datetime.fromisoformat(raw.replace("Z", "+00:00"))
    except ValueError:
        raise RowError(f"ordering value {raw!r} is not an ISO timestamp", line) from None
    return ts.timestamp() if ts.tzinfo is not None else ts.replace(tzinfo=None).timestamp()


def parse_csv_log(
    source,
    *,
    trace_column: str = "trace_id",
    order_column: str = "position",
    attributes: Sequence[str] | None = ("activity",),
    order_kind: str = "auto",
) -> TraceSet:
    """Read a comma-separated event log.

    Parameters
    ----------
    source : path, bytes or binary stream
        UTF-8 CSV with a header row.
    trace_column, order_column : str
        Column holding the trace id and the column events are sorted by.
    attributes : sequence of str or None
        Columns that become event attributes, in schema order.  ``None``
        takes every column other than the id and ordering columns.
    order_kind : {'auto', 'int', 'timestamp'}
        How to interpret the ordering column.  ``'auto'`` picks ``'int'`` if
        the first data row parses as an integer, ISO timestamps otherwise.

    Events are grouped by trace id (traces in order of first appearance) and
    stably sorted by the ordering column, so ties keep file order.  Empty
    attribute cells are encoded as :data:`MISSING`.
    """
    text = _open_binary(source).decode("utf-8-sig")
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyInputError("CSV input is empty") from None
    header = [h.strip() for h in header]

    def col(name):
        try:
            return header.index(name)
        except ValueError:
            raise SchemaError(f"missing column {name!r}") from None

    tid_col, ord_col = col(trace_column), col(order_column)
    if attributes is None:
        attributes = [h for h in header if h not in (trace_column, order_column)]
    attributes = list(attributes)
    if not attributes:
        raise SchemaError("at least one attribute column is required")
    attr_cols = [col(a) for a in attributes]
    interners = [_Interner() for _ in attributes]
    rows: dict[str, list] = {}
    kind = order_kind
    for line, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) < len(header):
            raise RowError(f"expected {len(header)} fields, got {len(row)}", line)
        if kind == "auto":
            try:
                int(row[ord_col].strip())
                kind = "int"
            except ValueError:
                kind = "timestamp"
        key = _order_key(row[ord_col], kind, line)
        codes = [it(row[c] if row[c] != "" else MISSING) for it, c in zip(interners, attr_cols)]
        rows.setdefault(row[tid_col], []).append((key, codes))
    if not rows:
        raise EmptyInputError("CSV input has a header but no events")
    traces = []
    for tid, evs in rows.items():
        evs.sort(key=lambda e: e[0])  # stable: ties keep file order
        traces.append(Trace(tid, np.array([c for _, c in evs], dtype=CODE_DTYPE)))
    schema = AttributeSchema(tuple(attributes), tuple(it.values for it in interners))
    return TraceSet(schema, tuple(traces))


_XES_VALUE_TAGS = {"string", "date", "int", "float", "boolean", "id"}


def parse_xes_log(source, *, keys: Sequence[str] = ("concept:name",)) -> TraceSet:
    """Read the minimal XES subset: ``<log>/<trace>/<event>`` with keyed values.

    Only attribute elements that are direct children of ``<event>`` are
    read.  A trace's id is its own ``concept:name`` value, or ``trace_<i>``
    when absent.  Every attribute dictionary ends with a reserved
    :data:`MISSING` code used by events that lack the key.
    """
    keys = list(keys)
    if not keys:
        raise SchemaError("at least one event key is required")
    data = _open_binary(source)
    interners = [_Interner() for _ in keys]
    key_pos = {k: i for i, k in enumerate(keys)}
    traces: list[tuple[str | None, list[list]]] = []
    stack: list[str] = []
    state = {"event": None, "trace_name": None}

    def start(tag, attrs):
        name = tag.split(":")[-1]
        parent = stack[-1] if stack else None
        stack.append(name)
        if name == "trace" and parent == "log":
            traces.append([None, []])
        elif name == "event" and parent == "trace":
            state["event"] = [None] * len(keys)
        elif name in _XES_VALUE_TAGS:
            if parent == "event" and state["event"] is not None:
                k = attrs.get("key")
                if k in key_pos:
                    state["event"][key_pos[k]] = attrs.get("value", "")
            elif parent == "trace" and traces and attrs.get("key") == "concept:name":
                traces[-1][0] = attrs.get("value")

    def end(tag):
        name = stack.pop()
        if name == "event" and state["event"] is not None and stack and stack[-1] == "trace":
            vals = state["event"]
            traces[-1][1].append([v if v is not None else MISSING for v in vals])
            state["event"] = None

    parser = expat.ParserCreate()
    parser.StartElementHandler = start
    parser.EndElementHandler = end
    try:
        parser.Parse(data, True)
    except expat.ExpatError as exc:
        raise XESParseError(expat.ErrorString(exc.code), parser.ErrorByteIndex) from None
    traces = [t for t in traces if t[1]]
    if not traces:
        raise EmptyInputError("XES log contains no <trace> elements with events")
    # observed values first, reserved missing code last
    for _, events in traces:
        for ev in events:
            for it, v in zip(interners, ev):
                if v != MISSING:
                    it(v)
    for it in interners:
        it(MISSING)
    out = []
    used = set()
    for i, (name, events) in enumerate(traces):
        tid = name if name is not None and name not in used else f"trace_{i}"
        used.add(tid)
        codes = [[it.codes[v] for it, v in zip(interners, ev)] for ev in events]
        out.append(Trace(tid, np.array(codes, dtype=CODE_DTYPE)))
    schema = AttributeSchema(tuple(keys), tuple(it.values for it in interners))
    return TraceSet(schema, tuple(out))


# --------------------------------------------------------------------------
# projection onto attribute subsets
# --------------------------------------------------------------------------


def _attr_indices(schema, attrs):
    attrs = list(attrs)
    if not attrs:
        raise SchemaError("attribute subset must be non-empty")
    return [schema.index(a) for a in attrs]


def composite_alphabet(trace_set: TraceSet, attrs: Sequence[str]) -> list[tuple[int, ...]]:
    """Composite symbols over ``attrs``; list position is the composite code.

    A single attribute uses its own dictionary codes.  Several attributes
    intern the observed code tuples in corpus order.
    """
    idx = _attr_indices(trace_set.schema, attrs)
    if len(idx) == 1:
        return [(c,) for c in range(len(trace_set.schema.values[idx[0]]))]
    seen: dict[tuple, int] = {}
    for t in trace_set:
        for row in t.events[:, idx].tolist():
            seen.setdefault(tuple(row), len(seen))
    return list(seen)


def project_symbols(trace_set: TraceSet, attrs: Sequence[str]) -> list[np.ndarray]:
    """One composite-symbol sequence per trace, aligned 1:1 with its events."""
    idx = _attr_indices(trace_set.schema, attrs)
    if len(idx) == 1:
        return [t.events[:, idx[0]].astype(np.int64) for t in trace_set]
    lookup = {s: i for i, s in enumerate(composite_alphabet(trace_set, attrs))}
    return [
        np.fromiter((lookup[tuple(r)] for r in t.events[:, idx].tolist()), dtype=np.int64, count=len(t))
        for t in trace_set
    ]


def encode_trace(trace: Trace, trace_set: TraceSet, attrs: Sequence[str]) -> np.ndarray:
    """Project a trace that is not part of ``trace_set`` onto its composite alphabet.

    Composites never seen in the corpus get code ``-1``, which every mapping
    rejects as out of domain.
    """
    idx = _attr_indices(trace_set.schema, attrs)
    if len(idx) == 1:
        return trace.events[:, idx[0]].astype(np.int64)
    lookup = {s: i for i, s in enumerate(composite_alphabet(trace_set, attrs))}
    return np.array([lookup.get(tuple(r), -1) for r in trace.events[:, idx].tolist()], dtype=np.int64)


# --------------------------------------------------------------------------
# export
# --------------------------------------------------------------------------


def write_csv(trace_set: TraceSet, dest, *, trace_column="trace_id", order_column="position"):
    """Write one row per event; re-reading with :func:`parse_csv_log` round-trips."""
    schema = trace_set.schema
    own = isinstance(dest, (str, os.PathLike))
    fh = open(dest, "w", newline="", encoding="utf-8") if own else dest
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([trace_column, order_column, *schema.attributes])
        for t in trace_set:
            for pos, row in enumerate(t.events.tolist(), start=1):
                vals = [schema.values[k][c] for k, c in enumerate(row)]
                w.writerow([t.id, pos, *["" if v == MISSING else v for v in vals]])
    finally:
        if own:
            fh.close()


def dump_jsonl(trace_set: TraceSet, dest: IO[str] | str | os.PathLike):
    """Schema header line followed by one ``{"id", "events"}`` object per trace."""
    own = isinstance(dest, (str, os.PathLike))
    fh = open(dest, "w", encoding="utf-8") if own else dest
    try:
        fh.write(json.dumps({"schema": trace_set.schema.to_dict()}, sort_keys=True) + "\n")
        for t in trace_set:
            fh.write(json.dumps({"id": t.id, "events": t.events.tolist()}, separators=(",", ":")) + "\n")
    finally:
        if own:
            fh.close()


def load_jsonl(source) -> TraceSet:
    text = _open_binary(source).decode("utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise EmptyInputError("JSON-lines input is empty")
    head = json.loads(lines[0])
    if "schema" not in head:
        raise SchemaError("first line must be the schema header")
    schema = AttributeSchema(tuple(head["schema"]["attributes"]), tuple(map(tuple, head["schema"]["values"])))
    traces = []
    for line_no, line in enumerate(lines[1:], start=2):
        try:
            obj = json.loads(line)
            traces.append(Trace(str(obj["id"]), np.array(obj["events"], dtype=CODE_DTYPE)))
        except (KeyError, ValueError) as exc:
            raise RowError(str(exc), line_no) from None
    if not traces:
        raise EmptyInputError("JSON-lines input holds a schema but no traces")
    return TraceSet(schema, tuple(traces))
