"""Summaries of a tiny hand-made log.

Run with ``python demos/01_summaries.py``.
"""

from tracesumm import (
    AttributeSchema,
    Trace,
    TraceSet,
    apply_reduced_mapping,
    build_attribute_mapping,
    check_sequence_preserving,
    project_symbols,
    summarize,
)

# Each event carries an activity and the department that performed it.
schema = AttributeSchema(
    ("activity", "department"),
    (("register", "check", "approve", "pay", "archive"), ("front", "finance", "records")),
)
log = TraceSet(
    schema,
    (
        Trace("claim-1", [[0, 0], [1, 0], [2, 1], [3, 1], [4, 2]]),
        Trace("claim-2", [[0, 0], [2, 1], [1, 0], [3, 1], [4, 2]]),
    ),
)

# Keep only the department: activities of one department become one symbol.
f = build_attribute_mapping(log, ["department"])
for trace, full, reduced in zip(log, summarize(log, f, reduced=False), summarize(log, f)):
    print(trace.id)
    print("  non-reduced:", [f.labels[c] for c in full.symbols])
    print("  reduced:    ", [f.labels[c] for c in reduced.symbols])
    print("  covers positions", reduced.origin_index)

# A reduced summary never reorders the events it covers.
seq = project_symbols(log, f.domain)[1]
print("order preserved:", check_sequence_preserving(seq, apply_reduced_mapping(seq, f), f))
