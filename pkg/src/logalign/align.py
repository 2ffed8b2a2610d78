"""Optimal alignments between a DAFSA and a tau-free reachability graph.

Three synchronization operations relate the two automata: ``match`` takes a
DAFSA arc and a graph arc with the same label, ``lhide`` takes only a DAFSA
arc (an event the model cannot mirror) and ``rhide`` takes only a graph arc
(a task the log is missing).  The cost of an alignment is the number of
hide operations on visible labels; on a tau-free graph that is simply the
number of hides.

``align_one_optimal`` runs an A* search that returns a single cheapest
proper alignment and breaks ties deterministically: lowest estimated total
cost first, then the longer candidate, then the operation precedence
match > rhide > lhide of the last move, then the lexicographic order of its
label, and finally the full move sequence.

``align_all_optimal`` computes every cost-minimal proper alignment of each
trace with a bounded forward/backward shortest-distance sweep over search
states, keeping exactly the moves on some cheapest path.  The memoized
variant seeds both sweeps with partial results recorded at shared trace
prefixes and suffixes; the sweeps stay exact, so memoization can speed the
search up but never changes the optima.
"""

from __future__ import annotations

import heapq
import threading
import time
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .dafsa import Dafsa
from .errors import LogAlignError, SearchBudgetError
from .heuristic import FutureLabelTable, precompute_future_labels
from .logs import EventLog, TAU
from .reachability import ReachabilityGraph

OP_MATCH = 0
OP_RHIDE = 1
OP_LHIDE = 2
OP_NAMES = {OP_MATCH: "match", OP_RHIDE: "rhide", OP_LHIDE: "lhide"}

DEFAULT_NODE_BUDGET = 2_000_000
_INF = float("inf")


class Move(NamedTuple):
    op: int
    label: int
    trail: tuple[int, ...]
    dafsa_src: Optional[int]
    dafsa_tgt: Optional[int]
    rg_src: Optional[int]
    rg_tgt: Optional[int]

    def core(self):
        return (self.op, self.label, self.trail)


@dataclass(frozen=True)
class Alignment:
    moves: tuple[Move, ...]
    cost: int

    def log_projection(self) -> tuple[int, ...]:
        return tuple(m.label for m in self.moves if m.op != OP_RHIDE)

    def model_projection(self) -> tuple[Move, ...]:
        return tuple(m for m in self.moves if m.op != OP_LHIDE)


def alignment_cost(moves) -> int:
    """Number of non-match moves whose label is visible."""
    return sum(1 for m in moves if m.op != OP_MATCH and m.label != TAU)


def make_alignment(moves) -> Alignment:
    moves = tuple(moves)
    return Alignment(moves, alignment_cost(moves))


def is_proper(alignment: Alignment, trace, rg: ReachabilityGraph) -> bool:
    """Propriety: the alignment spells the trace and its model moves form a
    contiguous arc path from the initial to a final marking."""
    if alignment.log_projection() != tuple(trace):
        return False
    arcset = {(a.src, a.label, a.trail, a.tgt) for a in rg.arcs}
    model = alignment.model_projection()
    if not model:
        return rg.m0 in rg.finals
    if model[0].rg_src != rg.m0 or model[-1].rg_tgt not in rg.finals:
        return False
    for prev, nxt in zip(model, model[1:]):
        if prev.rg_tgt != nxt.rg_src:
            return False
    return all((m.rg_src, m.label, m.trail, m.rg_tgt) in arcset for m in model)


def min_model_skips(rg: ReachabilityGraph) -> int:
    """Length of the shortest all-rhide completion, used as the search bound."""
    return rg.min_visible_skips()


# ---------------------------------------------------------------------------
# shared search plumbing


class _Node:
    __slots__ = ("parent", "move", "pos", "mid", "g", "length", "lrank")

    def __init__(self, parent, move, pos, mid, g, lrank):
        self.parent = parent
        self.move = move
        self.pos = pos
        self.mid = mid
        self.g = g
        self.length = 0 if parent is None else parent.length + 1
        self.lrank = lrank

    def chain(self):
        keys = []
        node = self
        while node.parent is not None:
            m = node.move
            keys.append((m.op, node.lrank,
                         -1 if m.rg_tgt is None else m.rg_tgt,
                         -1 if m.dafsa_tgt is None else m.dafsa_tgt,
                         m.trail))
            node = node.parent
        keys.reverse()
        return keys

    def __lt__(self, other):
        return self.chain() < other.chain()

    def moves(self):
        out = []
        node = self
        while node.parent is not None:
            out.append(node.move)
            node = node.parent
        out.reverse()
        return out


def _future_table(rg: ReachabilityGraph) -> FutureLabelTable:
    table = getattr(rg, "_future_table", None)
    if table is None:
        table = precompute_future_labels(rg)
        rg._future_table = table
    return table


def _remaining_counts(trace) -> list[dict[int, int]]:
    rem: list[dict[int, int]] = [dict() for _ in range(len(trace) + 1)]
    acc: dict[int, int] = {}
    for i in range(len(trace) - 1, -1, -1):
        acc = dict(acc)
        acc[trace[i]] = acc.get(trace[i], 0) + 1
        rem[i] = acc
    return rem


def _successors(trace, dpath, rg, pos, mid):
    """Deterministically ordered (move, npos, nmid, weight) expansions."""
    out = []
    if pos < len(trace):
        label = trace[pos]
        d_src, d_tgt = dpath[pos], dpath[pos + 1]
        for k in rg.out[mid]:
            a = rg.arcs[k]
            if a.label == label:
                out.append((Move(OP_MATCH, label, a.trail, d_src, d_tgt, a.src, a.tgt),
                            pos + 1, a.tgt, 0))
        out.append((Move(OP_LHIDE, label, (), d_src, d_tgt, None, None), pos + 1, mid, 1))
    for k in rg.out[mid]:
        a = rg.arcs[k]
        out.append((Move(OP_RHIDE, a.label, a.trail, None, None, a.src, a.tgt),
                    pos, a.tgt, 1))
    return out


def _dafsa_path(trace, dafsa: Dafsa) -> list[int]:
    dpath = dafsa.walk(tuple(trace))
    if dpath is None or dpath[-1] not in dafsa.finals:
        raise LogAlignError("trace is not in the language of the DAFSA")
    return dpath


class _Budget:
    __slots__ = ("left", "deadline")

    def __init__(self, node_budget, deadline):
        self.left = node_budget
        self.deadline = deadline

    def spend(self):
        self.left -= 1
        if self.left < 0:
            raise SearchBudgetError("alignment search exceeded its node budget")
        if self.deadline is not None and self.left % 256 == 0 and time.monotonic() > self.deadline:
            raise SearchBudgetError("alignment search exceeded its deadline")


# ---------------------------------------------------------------------------
# one optimal alignment (deterministic A*)


def align_one_optimal(trace, dafsa: Dafsa, rg: ReachabilityGraph, *,
                      node_budget: int = DEFAULT_NODE_BUDGET,
                      deadline: Optional[float] = None,
                      stats: Optional[dict] = None) -> Alignment:
    """Single cheapest proper alignment of a trace accepted by the DAFSA."""
    trace = tuple(trace)
    dpath = _dafsa_path(trace, dafsa)
    ftable = _future_table(rg)
    rem = _remaining_counts(trace)
    rank = rg.net.table.rank()
    budget = _Budget(node_budget, deadline)
    hcache: dict[tuple[int, int], int] = {}

    def h(pos, mid):
        key = (pos, mid)
        v = hcache.get(key)
        if v is None:
            v = ftable.h(rem[pos], mid)
            hcache[key] = v
        return v

    rho_max = len(trace) + rg.min_visible_skips()
    root = _Node(None, None, 0, rg.m0, 0, 0)
    heap = [(h(0, rg.m0), 0, 0, 0, root)]
    settled: dict[tuple[int, int], int] = {}
    max_rho = 0
    pops = 0
    while heap:
        rho, _, _, _, node = heapq.heappop(heap)
        key = (node.pos, node.mid)
        prior = settled.get(key)
        if prior is not None and prior <= node.g:
            continue
        settled[key] = node.g
        pops += 1
        budget.spend()
        if rho > max_rho:
            max_rho = rho
        if node.pos == len(trace) and node.mid in rg.finals:
            if stats is not None:
                stats["pops"] = pops
                stats["max_rho_popped"] = max_rho
            return make_alignment(node.moves())
        for move, npos, nmid, w in _successors(trace, dpath, rg, node.pos, node.mid):
            ng = node.g + w
            nkey = (npos, nmid)
            prior = settled.get(nkey)
            if prior is not None and prior <= ng:
                continue
            nrho = ng + h(npos, nmid)
            if nrho > rho_max:
                continue
            child = _Node(node, move, npos, nmid, ng, rank[move.label])
            heapq.heappush(heap, (nrho, -child.length, move.op, child.lrank, child))
    raise LogAlignError("no proper alignment exists for the trace")


# ---------------------------------------------------------------------------
# all optimal alignments (exact bounded shortest-distance sweeps)


class MemoTables:
    """Partial-alignment caches shared across traces (and worker threads).

    ``prefix`` maps a trace prefix ending at a branching DAFSA state to the
    optimal-cost search states reached after consuming it; ``suffix`` maps
    (merge DAFSA state, remaining suffix) to exact optimal completion costs
    per marking.  Both only ever hold pieces of previously returned optimal
    alignments, so seeding searches with them tightens bounds without
    changing any optimum.
    """

    def __init__(self):
        self.prefix: dict[tuple, dict[tuple[int, int], int]] = {}
        self.suffix: dict[tuple, dict[int, int]] = {}
        self._lock = threading.Lock()

    def prefix_seeds(self, trace) -> list[tuple[int, int, int]]:
        trace = tuple(trace)
        with self._lock:
            for i in range(len(trace), 0, -1):
                hit = self.prefix.get(trace[:i])
                if hit:
                    return [(pos, mid, g) for (pos, mid), g in sorted(hit.items())]
        return []

    def suffix_seeds(self, trace, dpath) -> list[tuple[int, int, int]]:
        trace = tuple(trace)
        seeds = []
        with self._lock:
            for pos in range(len(trace) + 1):
                hit = self.suffix.get((dpath[pos], trace[pos:]))
                if hit:
                    seeds.extend((pos, mid, db) for mid, db in sorted(hit.items()))
        return seeds

    def record(self, trace, dpath, dafsa: Dafsa, dist, db, cstar):
        trace = tuple(trace)
        pref: dict[tuple, dict] = {}
        suff: dict[tuple, dict] = {}
        for (pos, mid), g in dist.items():
            d = db.get((pos, mid))
            if d is None or g + d != cstar:
                continue
            if 0 < pos < len(trace):
                if dafsa.out_degree[dpath[pos]] > 1:
                    pref.setdefault(trace[:pos], {})[(pos, mid)] = g
                if dafsa.in_degree[dpath[pos]] > 1:
                    suff.setdefault((dpath[pos], trace[pos:]), {})[mid] = d
        with self._lock:
            for key, states in pref.items():
                slot = self.prefix.setdefault(key, {})
                for k, g in states.items():
                    if g < slot.get(k, _INF):
                        slot[k] = g
            for key, states in suff.items():
                slot = self.suffix.setdefault(key, {})
                for mid, d in states.items():
                    if d < slot.get(mid, _INF):
                        slot[mid] = d


class TraceResult(NamedTuple):
    cost: Optional[int]
    edges: Optional[dict]
    dpath: Optional[list]
    root: Optional[tuple]
    error: Optional[str]


def _all_optimal_trace(trace, dafsa, rg, memo: Optional[MemoTables],
                       node_budget, deadline):
    trace = tuple(trace)
    dpath = _dafsa_path(trace, dafsa)
    ftable = _future_table(rg)
    rem = _remaining_counts(trace)
    budget = _Budget(node_budget, deadline)
    hcache: dict[tuple[int, int], int] = {}

    def h(key):
        v = hcache.get(key)
        if v is None:
            v = ftable.h(rem[key[0]], key[1])
            hcache[key] = v
        return v

    goals = {(len(trace), f) for f in rg.finals}
    bound = len(trace) + rg.min_visible_skips()

    # forward sweep: exact cheapest cost to every state on some optimal path
    dist: dict[tuple[int, int], int] = {}
    heap: list = []

    def push_fwd(key, g):
        if g < dist.get(key, _INF):
            f = g + h(key)
            if f <= bound:
                dist[key] = g
                heapq.heappush(heap, (f, g, key))

    push_fwd((0, rg.m0), 0)
    if memo is not None:
        for pos, mid, g in memo.prefix_seeds(trace):
            push_fwd((pos, mid), g)
    while heap:
        f, g, key = heapq.heappop(heap)
        if g > dist.get(key, _INF) or f > bound:
            continue
        budget.spend()
        if key in goals:
            bound = min(bound, g)
            continue
        for move, npos, nmid, w in _successors(trace, dpath, rg, key[0], key[1]):
            push_fwd((npos, nmid), g + w)

    cstar = min((dist[k] for k in goals if k in dist), default=None)
    if cstar is None:
        raise LogAlignError("no proper alignment exists for the trace")

    # backward sweep: exact completion cost for states on some optimal path
    db: dict[tuple[int, int], int] = {}
    bheap: list = []

    def push_bwd(key, d):
        if d < db.get(key, _INF) and dist.get(key, _INF) + d <= cstar:
            db[key] = d
            heapq.heappush(bheap, (d, key))

    for goal in goals:
        push_bwd(goal, 0)
    if memo is not None:
        for pos, mid, d in memo.suffix_seeds(trace, dpath):
            push_bwd((pos, mid), d)
    while bheap:
        d, key = heapq.heappop(bheap)
        if d > db.get(key, _INF):
            continue
        budget.spend()
        pos, mid = key
        if pos > 0:
            push_bwd((pos - 1, mid), d + 1)  # lhide into key
            for k in rg.inn[mid]:
                a = rg.arcs[k]
                if a.label == trace[pos - 1]:
                    push_bwd((pos - 1, a.src), d)  # match into key
        for k in rg.inn[mid]:
            push_bwd((pos, rg.arcs[k].src), d + 1)  # rhide into key

    rank = rg.net.table.rank()
    edges: dict[tuple[int, int], tuple] = {}
    for key in sorted(dist):
        if key in goals or dist[key] + db.get(key, _INF) != cstar:
            continue
        nexts = []
        for move, npos, nmid, w in _successors(trace, dpath, rg, key[0], key[1]):
            nkey = (npos, nmid)
            if dist[key] + w + db.get(nkey, _INF) == cstar:
                nexts.append((move, nkey))
        if nexts:
            nexts.sort(key=lambda mn: (mn[0].op, rank[mn[0].label], mn[0].trail, mn[1]))
            edges[key] = tuple(nexts)

    if memo is not None:
        memo.record(trace, dpath, dafsa, dist, db, cstar)
    return cstar, edges, dpath


@dataclass
class Psp:
    """Product automaton collecting the computed alignments per log trace.

    Node keys pair a DAFSA state and a marking with the number of trace
    events consumed so far; arcs carry synchronization moves.  Every path
    from the initial node to a final node is a proper alignment of the
    trace it spells.
    """

    initial_key: tuple
    nodes: dict = field(default_factory=dict)
    arcs: set = field(default_factory=set)
    finals: set = field(default_factory=set)
    results: dict = field(default_factory=dict)
    _alignments: dict = field(default_factory=dict)

    def _node(self, key) -> int:
        nid = self.nodes.get(key)
        if nid is None:
            nid = len(self.nodes)
            self.nodes[key] = nid
        return nid

    def insert_alignment(self, trace, alignment: Alignment, keys):
        """Merge one alignment given its node keys (len(moves)+1 entries)."""
        trace = tuple(trace)
        ids = [self._node(k) for k in keys]
        for i, move in enumerate(alignment.moves):
            self.arcs.add((ids[i], move.core(), ids[i + 1]))
        self.finals.add(ids[-1])
        self.results[trace] = TraceResult(alignment.cost, None, None, None, None)
        self._alignments[trace] = (alignment,)

    def add_optimal_set(self, trace, cost, edges, dpath, m0):
        trace = tuple(trace)
        root = (0, m0)
        self.results[trace] = TraceResult(cost, edges, dpath, root, None)
        keys = {root}
        for key, nexts in edges.items():
            keys.add(key)
            keys.update(nkey for _, nkey in nexts)
        with_out = set(edges)
        for pos, mid in sorted(keys):
            nid = self._node((dpath[pos], mid, pos))
            if (pos, mid) not in with_out:
                self.finals.add(nid)
        for (pos, mid), nexts in edges.items():
            src = self._node((dpath[pos], mid, pos))
            for move, (npos, nmid) in nexts:
                self.arcs.add((src, move.core(), self._node((dpath[npos], nmid, npos))))

    def add_failure(self, trace, message: str):
        self.results[tuple(trace)] = TraceResult(None, None, None, None, message)

    def cost(self, trace) -> Optional[int]:
        res = self.results.get(tuple(trace))
        return None if res is None else res.cost

    def error(self, trace) -> Optional[str]:
        res = self.results.get(tuple(trace))
        return None if res is None else res.error

    def alignments_for(self, trace, limit: Optional[int] = None) -> tuple[Alignment, ...]:
        trace = tuple(trace)
        cached = self._alignments.get(trace)
        if cached is None:
            res = self.results.get(trace)
            if res is None or res.edges is None:
                return ()
            out: list[Alignment] = []

            def rec(key, acc):
                if limit is not None and len(out) >= limit:
                    return
                nexts = res.edges.get(key, ())
                if not nexts:
                    out.append(make_alignment(acc))
                    return
                for move, nkey in nexts:
                    acc.append(move)
                    rec(nkey, acc)
                    acc.pop()

            rec(res.root, [])
            cached = tuple(out)
            if limit is None:
                self._alignments[trace] = cached
        return cached if limit is None else cached[:limit]

    def count_optimal(self, trace) -> int:
        trace = tuple(trace)
        res = self.results.get(trace)
        if res is None:
            return 0
        if res.edges is None:
            return len(self._alignments.get(trace, ()))
        memo: dict = {}

        def paths(key):
            if key in memo:
                return memo[key]
            nexts = res.edges.get(key, ())
            memo[key] = 1 if not nexts else sum(paths(nkey) for _, nkey in nexts)
            return memo[key]

        return paths(res.root)


def align_all_optimal(log: EventLog, dafsa: Dafsa, rg: ReachabilityGraph, *,
                      node_budget: int = DEFAULT_NODE_BUDGET,
                      deadline: Optional[float] = None) -> Psp:
    """PSP holding every optimal proper alignment of every distinct trace."""
    return _align_all(log, dafsa, rg, None, node_budget, deadline)


def align_all_optimal_memoized(log: EventLog, dafsa: Dafsa, rg: ReachabilityGraph, *,
                               memo: Optional[MemoTables] = None,
                               node_budget: int = DEFAULT_NODE_BUDGET,
                               deadline: Optional[float] = None) -> Psp:
    """As align_all_optimal, reusing partial alignments across shared affixes."""
    return _align_all(log, dafsa, rg, memo if memo is not None else MemoTables(),
                      node_budget, deadline)


def _align_all(log, dafsa, rg, memo, node_budget, deadline):
    psp = Psp((dafsa.initial, rg.m0, 0))
    for trace in log.traces:
        try:
            cost, edges, dpath = _all_optimal_trace(trace.labels, dafsa, rg, memo,
                                                    node_budget, deadline)
        except SearchBudgetError as exc:
            psp.add_failure(trace.labels, str(exc))
            continue
        psp.add_optimal_set(trace.labels, cost, edges, dpath, rg.m0)
    return psp


def alignment_node_keys(alignment: Alignment, dafsa_initial: int, m0: int):
    """Node keys along a monolithic alignment, for PSP insertion."""
    pos, mid, dstate = 0, m0, dafsa_initial
    keys = [(dstate, mid, pos)]
    for move in alignment.moves:
        if move.op != OP_RHIDE:
            pos += 1
            dstate = move.dafsa_tgt
        if move.op != OP_LHIDE:
            mid = move.rg_tgt
        keys.append((dstate, mid, pos))
    return keys
