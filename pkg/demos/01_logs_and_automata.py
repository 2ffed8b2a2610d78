"""Parsing an event log, interning labels, and compressing it to a DAFSA.

Run with:  PYTHONPATH=src python3 demos/01_logs_and_automata.py
"""

from logalign import build_dafsa, common_affixes, language, parse_xes, write_xes
from logalign.sampledata import loan_log

log = loan_log()
print("The built-in loan log has %d distinct traces, %d events total:"
      % (len(log.traces), log.total_events))
for trace in log.traces:
    print("   %-32s x%d" % (",".join(log.texts(trace)), trace.frequency))

print("\nXES round-trip keeps traces and frequencies:")
again = parse_xes(write_xes(log))
assert {log.texts(t): t.frequency for t in log.traces} == \
    {again.texts(t): t.frequency for t in again.traces}
print("   ok")

dafsa = build_dafsa(log)
print("\nThe DAFSA compresses those %d events into %d arcs over %d states."
      % (log.total_events, len(dafsa.arcs), len(dafsa)))
print("Its language is exactly the distinct traces:")
for word in sorted(language(dafsa)):
    print("   %s" % ",".join(log.table.text(l) for l in word))

prefixes, suffixes = common_affixes(dafsa)
fmt = lambda seqs: sorted(",".join(log.table.text(l) for l in s) for s in seqs)
print("\nShared structure that later alignment runs can reuse:")
print("   common prefixes:", fmt(prefixes))
print("   common suffixes:", fmt(suffixes))
