"""Minimal place invariants and S-component decomposition.

A place invariant is a non-negative integer row vector J with J*N = 0 for
the incidence matrix N; its token-weighted sum is constant over reachable
markings.  The minimal invariants of a sound free-choice workflow net are
0/1 vectors whose supports induce concurrency-free sub-workflow-nets that
jointly cover the net.  Alignment work can then be divided along these
components.

The invariant solver runs the classic non-negative annihilator tableau in
exact integer arithmetic: one elimination round per transition column,
combining rows of opposite sign, normalizing by gcd, and finally keeping
only support-minimal rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

from .errors import DecompositionError
from .logs import TAU
from .petri import SystemNet, Transition, validate


@dataclass(frozen=True)
class PlaceInvariant:
    weights: tuple[int, ...]

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(p for p, w in enumerate(self.weights) if w)


def minimal_place_invariants(net: SystemNet) -> list[PlaceInvariant]:
    """All minimal semi-positive solutions of J*N = 0, support-ordered."""
    nplaces = len(net.places)
    ntrans = len(net.transitions)
    n, _, _ = net.incidence()
    # rows of [N | I]: effect vector per place plus its unit annotation
    rows: list[tuple[list[int], list[int]]] = []
    for p in range(nplaces):
        unit = [0] * nplaces
        unit[p] = 1
        rows.append(([int(x) for x in n[p]], unit))
    for t in range(ntrans):
        keep = [r for r in rows if r[0][t] == 0]
        pos = [r for r in rows if r[0][t] > 0]
        neg = [r for r in rows if r[0][t] < 0]
        for eff_p, ann_p in pos:
            for eff_n, ann_n in neg:
                cp, cn = -eff_n[t], eff_p[t]
                eff = [cp * a + cn * b for a, b in zip(eff_p, eff_n)]
                ann = [cp * a + cn * b for a, b in zip(ann_p, ann_n)]
                g = 0
                for v in eff + ann:
                    g = gcd(g, v)
                if g > 1:
                    eff = [v // g for v in eff]
                    ann = [v // g for v in ann]
                keep.append((eff, ann))
        rows = _drop_support_dominated(keep)
    result = {}
    for eff, ann in rows:
        if any(eff):
            continue
        if not any(ann):
            continue
        result[tuple(p for p, w in enumerate(ann) if w)] = PlaceInvariant(tuple(ann))
    inv = [result[s] for s in sorted(result)]
    return inv


def _drop_support_dominated(rows):
    """Remove duplicate rows and rows whose annotation support strictly
    contains another row's; minimal semiflows are support-minimal."""
    items = []
    seen = set()
    for eff, ann in rows:
        key = (tuple(eff), tuple(ann))
        if key not in seen:
            seen.add(key)
            items.append((eff, ann, frozenset(p for p, w in enumerate(ann) if w)))
    kept = []
    for i, (eff, ann, sup) in enumerate(items):
        dominated = False
        for j, (_, ann2, sup2) in enumerate(items):
            if i != j and sup2 < sup:
                dominated = True
                break
            if i > j and sup2 == sup:
                dominated = True
                break
        if not dominated:
            kept.append((eff, ann))
    return kept


@dataclass(frozen=True)
class SComponent:
    index: int
    net: SystemNet  # concurrency-free sub-workflow-net
    place_ids: tuple[int, ...]  # indices into the parent net's places
    transition_ids: tuple[int, ...]  # indices into the parent net's transitions
    alphabet: frozenset[int]  # visible label ids of the component


@dataclass(frozen=True)
class SComponentDecomposition:
    net: SystemNet
    invariants: tuple[PlaceInvariant, ...]
    components: tuple[SComponent, ...]
    place_cover: dict
    transition_cover: dict

    def components_of_transition(self, t: int) -> tuple[int, ...]:
        return self.transition_cover[t]


def decompose(net: SystemNet) -> SComponentDecomposition:
    """One concurrency-free component per minimal invariant, cover-checked."""
    report = validate(net)
    if not report.decomposable:
        raise DecompositionError("net is not a uniquely-labelled free-choice workflow net: %s"
                                 % "; ".join(report.problems))
    invariants = minimal_place_invariants(net)
    if not invariants:
        raise DecompositionError("no place invariants found")
    source = next(p for p in range(len(net.places)) if net.m0 >> p & 1)
    (final_marking,) = net.finals
    sink = next(p for p in range(len(net.places)) if final_marking >> p & 1)

    components = []
    place_cover: dict[int, list[int]] = {p: [] for p in range(len(net.places))}
    transition_cover: dict[int, list[int]] = {t: [] for t in range(len(net.transitions))}
    for idx, inv in enumerate(invariants):
        if any(w not in (0, 1) for w in inv.weights):
            raise DecompositionError("invariant %d is not a 0/1 vector" % idx)
        pset = set(inv.support)
        if source not in pset or sink not in pset:
            raise DecompositionError("invariant %d misses the source or sink place" % idx)
        tset = []
        for t in range(len(net.transitions)):
            npre = sum(1 for p in net.preset_places(t) if p in pset)
            npost = sum(1 for p in net.postset_places(t) if p in pset)
            if npre == 1 and npost == 1:
                tset.append(t)
            elif npre or npost:
                raise DecompositionError(
                    "transition %s is unbalanced on invariant %d"
                    % (net.transitions[t].name, idx))
        place_ids = tuple(sorted(pset))
        sub = _subnet(net, place_ids, tuple(tset), source, sink)
        sub_report = validate(sub)
        if not sub_report.workflow_ok:
            raise DecompositionError("component %d is not a workflow net: %s"
                                     % (idx, "; ".join(sub_report.problems)))
        alphabet = frozenset(net.transitions[t].label for t in tset) - {TAU}
        components.append(SComponent(idx, sub, place_ids, tuple(tset), alphabet))
        for p in place_ids:
            place_cover[p].append(idx)
        for t in tset:
            transition_cover[t].append(idx)

    if any(not v for v in place_cover.values()) or any(not v for v in transition_cover.values()):
        raise DecompositionError("components do not cover the net")
    for t in range(len(net.transitions)):
        owners = set(transition_cover[t])
        pre_cover = set().union(*(place_cover[p] for p in net.preset_places(t)))
        post_cover = set().union(*(place_cover[p] for p in net.postset_places(t)))
        if not (pre_cover == owners == post_cover):
            raise DecompositionError("pre/post cover mismatch at transition %s"
                                     % net.transitions[t].name)
    return SComponentDecomposition(
        net, tuple(invariants), tuple(components),
        {p: tuple(v) for p, v in place_cover.items()},
        {t: tuple(v) for t, v in transition_cover.items()})


def _subnet(net: SystemNet, place_ids, transition_ids, source, sink) -> SystemNet:
    pos = {p: i for i, p in enumerate(place_ids)}
    places = tuple(net.places[p] for p in place_ids)
    transitions = []
    pre = []
    post = []
    for t in transition_ids:
        transitions.append(Transition(net.transitions[t].name, net.transitions[t].label))
        pre.append(sum(1 << pos[p] for p in net.preset_places(t) if p in pos))
        post.append(sum(1 << pos[p] for p in net.postset_places(t) if p in pos))
    return SystemNet(places, tuple(transitions), tuple(pre), tuple(post),
                     1 << pos[source], frozenset({1 << pos[sink]}), net.table)
