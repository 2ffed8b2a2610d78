"""Divide-and-conquer alignment along S-components and its recomposition.

Each trace is projected onto every component's alphabet and aligned against
that component's (extended-label, tau-free) reachability graph.  The
projected alignments are then replayed in parallel over the original trace:
a log event composes when every component owning its label proposes the
same operation for it, and components catch up beforehand through jointly
agreed model skips.  Disagreements (on order, on operation, or on the tau
history hidden inside an extended label) abort the replay and the trace
falls back to a monolithic search on the full reachability graph.

Recomposed alignments are proper but not necessarily optimal; they never
cost less than a monolithic optimum.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from typing import Callable, Optional

from .align import (DEFAULT_NODE_BUDGET, OP_LHIDE, OP_MATCH, OP_RHIDE, Alignment,
                    Move, Psp, align_one_optimal, alignment_node_keys, make_alignment)
from .dafsa import build_dafsa
from .errors import LogAlignError, SearchBudgetError
from .invariants import SComponentDecomposition, decompose
from .logs import EventLog, project_log
from .reachability import ReachabilityGraph, build_rg, remove_tau, remove_tau_extended

ORDER_CONFLICT = "order-conflict"
OPERATION_CONFLICT = "operation-conflict"
EXTENDED_LABEL_CONFLICT = "extended-label-conflict"


@dataclass(frozen=True)
class RecompositionOutcome:
    trace: tuple[int, ...]
    alignment: Optional[Alignment]
    conflict: Optional[str]
    fallback_used: bool
    error: Optional[str] = None


class _Lane:
    """Per-component replay cursor over a projected alignment."""

    __slots__ = ("moves", "pos")

    def __init__(self, moves):
        self.moves = moves
        self.pos = 0

    def peek(self):
        return self.moves[self.pos] if self.pos < len(self.moves) else None


class SComponentAligner:
    """Aligns traces of one log against one net through its S-components."""

    def __init__(self, net, log: EventLog, decomposition: Optional[SComponentDecomposition] = None,
                 *, memo: bool = True, node_budget: int = DEFAULT_NODE_BUDGET,
                 full_rg: Optional[Callable[[], ReachabilityGraph]] = None):
        self.net = net
        self.log = log
        self.decomposition = decomposition if decomposition is not None else decompose(net)
        self.node_budget = node_budget
        self.memo = memo
        self.rank = net.table.rank()
        self.global_dafsa = build_dafsa(log)
        self.components = []
        for comp in self.decomposition.components:
            rg = remove_tau_extended(build_rg(comp.net))
            projected = project_log(log, comp.alphabet)
            dafsa = build_dafsa(projected)
            self.components.append((comp, rg, dafsa))
        self._proj_cache: dict = {}
        self._full_rg_factory = full_rg
        self._full_rg: Optional[ReachabilityGraph] = None
        self._lock = threading.Lock()

    # -- lazy monolithic graph for conflicting traces --------------------

    def full_rg(self) -> ReachabilityGraph:
        with self._lock:
            if self._full_rg is None:
                if self._full_rg_factory is not None:
                    self._full_rg = self._full_rg_factory()
                else:
                    self._full_rg = remove_tau(build_rg(self.net))
            return self._full_rg

    def component_rgs(self) -> list[ReachabilityGraph]:
        return [rg for _, rg, _ in self.components]

    # -- per-component projected alignments ------------------------------

    def _lane_moves(self, idx: int, projected: tuple[int, ...], deadline) -> tuple:
        key = (idx, projected)
        if self.memo:
            with self._lock:
                hit = self._proj_cache.get(key)
            if hit is not None:
                return hit
        comp, rg, dafsa = self.components[idx]
        alignment = align_one_optimal(projected, dafsa, rg,
                                      node_budget=self.node_budget, deadline=deadline)
        moves = tuple(
            (m.op, m.label, tuple(comp.transition_ids[x] for x in m.trail), m.rg_tgt)
            for m in alignment.moves)
        if self.memo:
            with self._lock:
                self._proj_cache[key] = moves
        return moves

    # -- the replay itself ------------------------------------------------

    def align_trace(self, trace, deadline: Optional[float] = None) -> RecompositionOutcome:
        trace = tuple(trace)
        try:
            lanes = []
            for idx, (comp, rg, dafsa) in enumerate(self.components):
                projected = tuple(l for l in trace if l in comp.alphabet)
                lanes.append(_Lane(self._lane_moves(idx, projected, deadline)))
        except SearchBudgetError as exc:
            return RecompositionOutcome(trace, None, None, False, str(exc))

        composed, conflict = self._replay(trace, lanes)
        if conflict is None:
            # hidden silent-history divergence: components may absorb a shared
            # silent transition into different visible arcs, composing cleanly
            # into a sequence the whole model cannot actually execute
            visible = [m.label for m in composed if m.op != OP_LHIDE]
            if not visible_run_realizable(self.net, visible):
                conflict = EXTENDED_LABEL_CONFLICT
        if conflict is None:
            return RecompositionOutcome(trace, make_alignment(composed), None, False)
        try:
            alignment = align_one_optimal(trace, self.global_dafsa, self.full_rg(),
                                          node_budget=self.node_budget, deadline=deadline)
        except LogAlignError as exc:
            # the monolithic graph may itself be unbuildable (state cap) or
            # the search may run out of budget; only this trace fails
            return RecompositionOutcome(trace, None, conflict, True, str(exc))
        return RecompositionOutcome(trace, alignment, conflict, True)

    def _replay(self, trace, lanes):
        alphabets = [comp.alphabet for comp, _, _ in self.components]
        gpath = self.global_dafsa.walk(trace)
        composed: list[Move] = []
        for pos_c in range(len(trace) + 1):
            label = trace[pos_c] if pos_c < len(trace) else None
            conflict = self._catch_up(label, lanes, alphabets, composed)
            if conflict:
                return None, conflict
            if label is None:
                break
            owners = [i for i, alpha in enumerate(alphabets) if label in alpha]
            nexts = [lanes[i].peek() for i in owners]
            if any(n is None or n[1] != label for n in nexts):
                return None, OPERATION_CONFLICT
            ops = {n[0] for n in nexts}
            d_src = gpath[pos_c] if gpath else None
            d_tgt = gpath[pos_c + 1] if gpath else None
            if not owners:
                # the model knows nothing about this event; log-only move
                composed.append(Move(OP_LHIDE, label, (), d_src, d_tgt, None, None))
            elif ops == {OP_LHIDE}:
                composed.append(Move(OP_LHIDE, label, (), d_src, d_tgt, None, None))
            elif ops == {OP_MATCH}:
                trails = {n[2] for n in nexts}
                if len(trails) > 1:
                    return None, EXTENDED_LABEL_CONFLICT
                composed.append(Move(OP_MATCH, label, trails.pop(), d_src, d_tgt, None, None))
            else:
                return None, OPERATION_CONFLICT
            for i in owners:
                lanes[i].pos += 1
        return composed, None

    def _catch_up(self, label, lanes, alphabets, composed):
        """Compose agreed model skips until every owner of ``label`` is at it."""
        while True:
            waiting = [
                i for i, lane in enumerate(lanes)
                if lane.peek() is not None and (
                    label is None or (label in alphabets[i] and lane.peek()[1] != label))
            ]
            if not waiting:
                return None
            proposals: dict = {}
            for i, lane in enumerate(lanes):
                nxt = lane.peek()
                if nxt is not None and nxt[0] == OP_RHIDE:
                    proposals.setdefault((nxt[1], nxt[2]), set()).add(i)
            chosen = None
            for (x, trail), members in sorted(
                    proposals.items(), key=lambda kv: (self.rank[kv[0][0]], kv[0][1])):
                owners = {i for i, alpha in enumerate(alphabets) if x in alpha}
                if members == owners:
                    chosen = (x, trail, members)
                    break
            if chosen is None:
                by_label: dict = {}
                for (x, trail), members in proposals.items():
                    by_label.setdefault(x, set()).update(members)
                for x, members in by_label.items():
                    owners = {i for i, alpha in enumerate(alphabets) if x in alpha}
                    if members == owners and len({t for (y, t) in proposals if y == x}) > 1:
                        return EXTENDED_LABEL_CONFLICT
                return ORDER_CONFLICT
            x, trail, members = chosen
            composed.append(Move(OP_RHIDE, x, trail, None, None, None, None))
            for i in members:
                lanes[i].pos += 1


def align_recomposed(log: EventLog, net, *, decomposition=None, memo: bool = True,
                     node_budget: int = DEFAULT_NODE_BUDGET,
                     per_trace_timeout: Optional[float] = None,
                     full_rg: Optional[Callable[[], ReachabilityGraph]] = None
                     ) -> tuple[Psp, list[RecompositionOutcome]]:
    """Align every distinct trace through the S-components, with fallback.

    Returns the PSP over the composed alignments plus one outcome record per
    trace (conflict kind and whether the monolithic fallback ran).
    """
    aligner = SComponentAligner(net, log, decomposition, memo=memo,
                                node_budget=node_budget, full_rg=full_rg)
    root_marks = tuple(rg.m0 for _, rg, _ in aligner.components)
    psp = Psp((aligner.global_dafsa.initial, root_marks, 0))
    outcomes = []
    for trace in log.traces:
        deadline = None if per_trace_timeout is None else time.monotonic() + per_trace_timeout
        outcome = aligner.align_trace(trace.labels, deadline)
        outcomes.append(outcome)
        if outcome.alignment is None:
            psp.add_failure(trace.labels, outcome.error or "alignment failed")
        elif outcome.fallback_used:
            keys = alignment_node_keys(outcome.alignment, aligner.global_dafsa.initial,
                                       aligner.full_rg().m0)
            psp.insert_alignment(trace.labels, outcome.alignment, keys)
        else:
            psp.insert_alignment(trace.labels, outcome.alignment,
                                 _composed_node_keys(outcome.alignment, aligner))
    return psp, outcomes


def _composed_node_keys(alignment: Alignment, aligner: SComponentAligner):
    """PSP node keys for a recomposed alignment: DAFSA state, the vector of
    component markings, and the count of consumed events."""
    marks = [rg.m0 for _, rg, _ in aligner.components]
    alphabets = [comp.alphabet for comp, _, _ in aligner.components]
    rgs = [rg for _, rg, _ in aligner.components]
    dstate = aligner.global_dafsa.initial
    pos = 0
    keys = [(dstate, tuple(marks), pos)]
    for move in alignment.moves:
        if move.op != OP_RHIDE:
            pos += 1
            dstate = move.dafsa_tgt
        if move.op != OP_LHIDE:
            for i, alpha in enumerate(alphabets):
                if move.label in alpha:
                    marks[i] = _advance(rgs[i], marks[i], move, aligner)
        keys.append((dstate, tuple(marks), pos))
    return keys


def _advance(rg: ReachabilityGraph, mid: int, move: Move, aligner: SComponentAligner):
    comp = next(c for c, r, _ in aligner.components if r is rg)
    for k in rg.out[mid]:
        a = rg.arcs[k]
        gtrail = tuple(comp.transition_ids[x] for x in a.trail)
        if a.label == move.label and gtrail == move.trail:
            return a.tgt
    return mid


def visible_run_realizable(net, labels) -> bool:
    """Whether the net can execute exactly this visible label sequence and
    silently reach a final marking, decided by a tau-closure walk over
    marking sets (no reachability graph needed)."""
    from .logs import TAU as _TAU

    silent = [t for t in range(len(net.transitions)) if net.transitions[t].label == _TAU]
    by_label: dict[int, list[int]] = {}
    for t in range(len(net.transitions)):
        if net.transitions[t].label != _TAU:
            by_label.setdefault(net.transitions[t].label, []).append(t)

    def closure(markings):
        seen = set(markings)
        stack = list(markings)
        while stack:
            m = stack.pop()
            for t in silent:
                if net.enabled(m, t) and not net.fire_overflows(m, t):
                    m2 = (m & ~net.pre[t]) | net.post[t]
                    if m2 not in seen:
                        seen.add(m2)
                        stack.append(m2)
        return seen

    current = closure({net.m0})
    for label in labels:
        nxt = set()
        for t in by_label.get(label, ()):
            for m in current:
                if net.enabled(m, t) and not net.fire_overflows(m, t):
                    nxt.add((m & ~net.pre[t]) | net.post[t])
        if not nxt:
            return False
        current = closure(nxt)
    return bool(current & net.finals)


def replays_on_model(alignment: Alignment, trace, rg: ReachabilityGraph) -> bool:
    """Propriety of a (possibly recomposed) alignment against a tau-free
    reachability graph: it spells the trace and its model moves can be read
    as one contiguous path from the initial to a final marking."""
    if alignment.log_projection() != tuple(trace):
        return False
    current = {rg.m0}
    for move in alignment.model_projection():
        current = {rg.arcs[k].tgt for u in current for k in rg.out[u]
                   if rg.arcs[k].label == move.label}
        if not current:
            return False
    return bool(current & rg.finals)


def hybrid_select(rg: Optional[ReachabilityGraph],
                  component_rgs: Optional[list[ReachabilityGraph]]) -> tuple[str, dict]:
    """Pick the alignment strategy by comparing state-space sizes.

    The decomposed route wins exactly when the summed sizes (markings plus
    arcs) of all component graphs are strictly below the monolithic graph's
    size.  When the monolithic graph could not be built at all, the
    decomposed route is the only option left.
    """
    info = {
        "rg_size": None if rg is None else rg.size(),
        "component_rg_sizes": None if component_rgs is None
        else [c.size() for c in component_rgs],
        "component_rg_total": None if component_rgs is None
        else sum(c.size() for c in component_rgs),
    }
    if component_rgs is None:
        return "monolithic", info
    if rg is None:
        return "s-component", info
    choice = "s-component" if info["component_rg_total"] < info["rg_size"] else "monolithic"
    return choice, info
