"""Admissible future-cost estimate for alignment search.

For every marking of a tau-free reachability graph we precompute the set of
label multisets that can still be produced on the way to a final marking.
The computation walks the strongly connected components backwards from the
finals; labels on arcs inside a nontrivial component are recorded with an
unbounded-repetition flag instead of a count.

The estimate for a search state compares the multiset of remaining trace
labels F against each future multiset (counts, repeatable):

    missing(F, entry) = sum over labels not repeatable of max(0, F[l] - counts[l])
    surplus(F, entry) = sum over counted labels of max(0, counts[l] - F[l])

and takes the minimum of missing + surplus over all entries.  Repeatable
labels absorb any number of trace occurrences and never demand a skip
themselves, which keeps the estimate optimistic.
"""

from __future__ import annotations

from dataclasses import dataclass

from .reachability import ReachabilityGraph

DEFAULT_ENTRY_CAP = 256

Entry = tuple[tuple[tuple[int, int], ...], frozenset[int]]  # (sorted counts, repeatable)


@dataclass
class FutureLabelTable:
    rg: ReachabilityGraph
    entries: tuple[tuple[Entry, ...], ...]  # per marking id

    def h(self, remaining: dict[int, int], mid: int) -> int:
        best = None
        for counts, omega in self.entries[mid]:
            cdict = dict(counts)
            missing = 0
            for l, f in remaining.items():
                if l not in omega:
                    d = f - cdict.get(l, 0)
                    if d > 0:
                        missing += d
            surplus = 0
            for l, c in counts:
                d = c - remaining.get(l, 0)
                if d > 0:
                    surplus += d
            v = missing + surplus
            if best is None or v < best:
                best = v
                if best == 0:
                    break
        return best if best is not None else 0


def precompute_future_labels(rg: ReachabilityGraph, entry_cap: int = DEFAULT_ENTRY_CAP) -> FutureLabelTable:
    if not rg.reduced:
        raise ValueError("future labels are computed on a tau-free graph")
    n = len(rg.markings)
    comp = _tarjan(n, rg)
    ncomp = max(comp) + 1 if n else 0
    members: list[list[int]] = [[] for _ in range(ncomp)]
    for mid in range(n):
        members[comp[mid]].append(mid)

    internal: list[set[int]] = [set() for _ in range(ncomp)]
    crossing: list[list] = [[] for _ in range(ncomp)]
    nontrivial = [len(m) > 1 for m in members]
    for a in rg.arcs:
        c = comp[a.src]
        if comp[a.tgt] == c:
            internal[c].add(a.label)
            nontrivial[c] = True
        else:
            crossing[c].append(a)

    all_labels = frozenset(a.label for a in rg.arcs)
    has_final = [False] * ncomp
    for f in rg.finals:
        has_final[comp[f]] = True

    # Tarjan emits components in reverse topological order, so successors of
    # a component are always finished before it
    futures: list[tuple[Entry, ...]] = [()] * ncomp
    for c in range(ncomp):
        omega_base = frozenset(internal[c]) if nontrivial[c] else frozenset()
        acc: dict = {}

        def put(counts: dict[int, int], omega: frozenset[int]):
            key = (tuple(sorted(counts.items())), omega)
            acc[key] = True

        if has_final[c]:
            put({}, omega_base)
        for a in crossing[c]:
            for counts, omega in futures[comp[a.tgt]]:
                merged = dict(counts)
                merged[a.label] = merged.get(a.label, 0) + 1
                put(merged, omega | omega_base)
        if len(acc) > entry_cap:
            futures[c] = (((), all_labels),)  # degenerate but still optimistic
        else:
            futures[c] = tuple(sorted(acc))
    return FutureLabelTable(rg, tuple(futures[comp[mid]] for mid in range(n)))


def _tarjan(n: int, rg: ReachabilityGraph) -> list[int]:
    """Iterative Tarjan; component ids in emission (reverse topological) order."""
    comp = [-1] * n
    low = [0] * n
    num = [-1] * n
    counter = 0
    ncomp = 0
    stack: list[int] = []
    on_stack = [False] * n
    for root in range(n):
        if num[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                num[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            while pi < len(rg.out[v]):
                w = rg.arcs[rg.out[v][pi]].tgt
                pi += 1
                if num[w] == -1:
                    work[-1] = (v, pi)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], num[w])
            if advanced:
                continue
            work.pop()
            if low[v] == num[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return comp
