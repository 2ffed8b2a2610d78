"""End-to-end conformance run: strategy selection, alignment, report assembly.

The pipeline parses nothing itself; it takes an already built net and log
sharing one label table and produces a machine-readable report:

    parse -> validate -> (decompose?) -> build graphs -> remove tau
          -> build DAFSA(s) -> align per strategy -> report

Per-trace fitness is 1 - cost / (|trace| + minModelSkips), clamped to
[0, 1]; minModelSkips is the length of the shortest visible model run, so
the denominator is the cost of the degenerate hide-everything alignment.
The raw fitness cost aggregate is the frequency-weighted total cost.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

from .align import (DEFAULT_NODE_BUDGET, MemoTables, OP_NAMES, Alignment,
                    align_all_optimal, align_all_optimal_memoized, align_one_optimal)
from .dafsa import build_dafsa, dafsa_to_dot
from .errors import SearchBudgetError, StateSpaceCapError, TauReductionError
from .invariants import decompose
from .logs import EventLog
from .petri import SystemNet, net_to_dot, validate
from .reachability import (DEFAULT_MARKING_CAP, build_rg, min_visible_skips_net,
                           remove_tau, rg_to_dot)
from .recompose import SComponentAligner, hybrid_select

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_GLOBAL_TIMEOUT = 3
EXIT_STATE_CAP = 4


@dataclass
class RunConfig:
    strategy: str = "auto"  # auto | monolithic | scomponent
    all_optimal: bool = False
    memo: bool = True
    threads: int = 1
    timeout_ms: Optional[int] = None  # per trace
    global_timeout_ms: Optional[int] = None
    state_cap: int = DEFAULT_MARKING_CAP
    node_budget: int = DEFAULT_NODE_BUDGET
    emit_alignments: bool = False
    dot_dir: Optional[str] = None


@dataclass
class RunResult:
    report: dict
    exit_code: int
    psp: object = None


def moves_to_dicts(net: SystemNet, alignment: Alignment) -> list[dict]:
    out = []
    for m in alignment.moves:
        out.append({
            "op": OP_NAMES[m.op],
            "label": net.table.text(m.label),
            "tau_trail": [net.transitions[t].name for t in m.trail],
        })
    return out


def fitness_of(cost: int, length: int, skips: Optional[int]) -> Optional[float]:
    if skips is None:
        return None
    denom = length + skips
    if denom == 0:
        return 1.0
    return max(0.0, min(1.0, 1.0 - cost / denom))


def run_conformance(net: SystemNet, log: EventLog, config: RunConfig) -> RunResult:
    timings: dict[str, float] = {}
    t0 = time.perf_counter()

    def mark(name, since):
        timings[name] = round((time.perf_counter() - since) * 1000.0, 3)
        return time.perf_counter()

    report_strategy = {"requested": config.strategy, "chosen": None, "reason": None,
                       "rg_size": None, "component_rg_sizes": None,
                       "component_rg_total": None}

    t = time.perf_counter()
    vreport = validate(net)
    t = mark("validate", t)

    # decomposition attempt
    aligner = None
    decomposition_error = None
    if config.strategy in ("auto", "scomponent") and vreport.decomposable:
        try:
            aligner = SComponentAligner(
                net, log, memo=config.memo, node_budget=config.node_budget,
                full_rg=lambda: remove_tau(build_rg(net, cap=config.state_cap)))
        except Exception as exc:  # decomposition or component reduction failed
            decomposition_error = str(exc)
            aligner = None
    elif config.strategy in ("auto", "scomponent"):
        decomposition_error = "net is not decomposable: %s" % "; ".join(vreport.problems)
    t = mark("decompose", t)

    # monolithic graph (may exceed the cap)
    rg = None
    cap_error = None
    try:
        rg = remove_tau(build_rg(net, cap=config.state_cap))
    except StateSpaceCapError as exc:
        cap_error = str(exc)
    t = mark("build_rg", t)

    # strategy selection
    if config.strategy == "monolithic":
        chosen = "monolithic"
        report_strategy["reason"] = "requested"
        if rg is not None:
            report_strategy["rg_size"] = rg.size()
    elif config.strategy == "scomponent":
        if aligner is None:
            chosen = "monolithic"
            report_strategy["reason"] = decomposition_error or "decomposition unavailable"
            if rg is not None:
                report_strategy["rg_size"] = rg.size()
        else:
            chosen = "s-component"
            report_strategy["reason"] = "requested"
            comp_rgs = aligner.component_rgs()
            report_strategy["rg_size"] = None if rg is None else rg.size()
            report_strategy["component_rg_sizes"] = [c.size() for c in comp_rgs]
            report_strategy["component_rg_total"] = sum(c.size() for c in comp_rgs)
    else:  # auto
        comp_rgs = None if aligner is None else aligner.component_rgs()
        chosen, info = hybrid_select(rg, comp_rgs)
        report_strategy.update(info)
        if aligner is None:
            report_strategy["reason"] = decomposition_error or "no decomposition"
        else:
            report_strategy["reason"] = "state-space comparison"
    report_strategy["chosen"] = chosen

    if chosen == "monolithic" and rg is None:
        report = _base_report(net, log, vreport, report_strategy, None, timings, [])
        report["error"] = cap_error
        return RunResult(report, EXIT_STATE_CAP)

    # minimum visible model run, for the fitness denominator
    try:
        skips = rg.min_visible_skips() if rg is not None \
            else min_visible_skips_net(net, cap=config.state_cap)
    except (StateSpaceCapError, TauReductionError):
        skips = None

    global_deadline = None
    if config.global_timeout_ms is not None:
        global_deadline = t0 + config.global_timeout_ms / 1000.0

    t = time.perf_counter()
    if chosen == "monolithic":
        dafsa = build_dafsa(log)
    else:
        dafsa = aligner.global_dafsa  # already built for the fallback route
    t = mark("build_dafsa", t)

    rows, psp, timed_out = _align_all_traces(
        net, log, dafsa, rg, aligner, chosen, config, skips, global_deadline)
    mark("align", t)
    timings["total"] = round((time.perf_counter() - t0) * 1000.0, 3)

    if config.dot_dir:
        _write_dots(net, log, rg, aligner, dafsa, config.dot_dir)

    report = _base_report(net, log, vreport, report_strategy, skips, timings, rows)
    exit_code = EXIT_GLOBAL_TIMEOUT if timed_out else EXIT_OK
    return RunResult(report, exit_code, psp)


def _align_all_traces(net, log, dafsa, rg, aligner, chosen, config, skips, global_deadline):
    memo = MemoTables() if config.memo else None
    timed_out = [False]

    def per_trace_deadline():
        candidates = []
        if config.timeout_ms is not None:
            candidates.append(time.monotonic() + config.timeout_ms / 1000.0)
        if global_deadline is not None:
            candidates.append(global_deadline)
        return min(candidates) if candidates else None

    psp = None
    results: list[dict] = []

    if chosen == "monolithic" and config.all_optimal:
        if config.memo:
            psp = align_all_optimal_memoized(log, dafsa, rg, memo=memo,
                                             node_budget=config.node_budget)
        else:
            psp = align_all_optimal(log, dafsa, rg, node_budget=config.node_budget)
        for trace in log.traces:
            cost = psp.cost(trace.labels)
            entry = {"cost": cost, "conflict": None, "fallback": False,
                     "error": psp.error(trace.labels),
                     "n_optimal": psp.count_optimal(trace.labels) if cost is not None else 0,
                     "alignment": None}
            if cost is not None and config.emit_alignments:
                entry["alignment"] = psp.alignments_for(trace.labels, limit=1)[0]
            results.append(entry)
        return _rows(net, log, results, chosen, skips, config), psp, False

    def job_monolithic(trace):
        if global_deadline is not None and time.monotonic() > global_deadline:
            timed_out[0] = True
            return {"cost": None, "conflict": None, "fallback": False,
                    "error": "global timeout", "alignment": None}
        try:
            alignment = align_one_optimal(trace.labels, dafsa, rg,
                                          node_budget=config.node_budget,
                                          deadline=per_trace_deadline())
            return {"cost": alignment.cost, "conflict": None, "fallback": False,
                    "error": None, "alignment": alignment}
        except SearchBudgetError as exc:
            return {"cost": None, "conflict": None, "fallback": False,
                    "error": str(exc), "alignment": None}

    def job_scomponent(trace):
        if global_deadline is not None and time.monotonic() > global_deadline:
            timed_out[0] = True
            return {"cost": None, "conflict": None, "fallback": False,
                    "error": "global timeout", "alignment": None}
        outcome = aligner.align_trace(trace.labels, per_trace_deadline())
        cost = None if outcome.alignment is None else outcome.alignment.cost
        return {"cost": cost, "conflict": outcome.conflict,
                "fallback": outcome.fallback_used, "error": outcome.error,
                "alignment": outcome.alignment}

    job = job_monolithic if chosen == "monolithic" else job_scomponent
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(job, log.traces))
    else:
        results = [job(trace) for trace in log.traces]
    return _rows(net, log, results, chosen, skips, config), psp, timed_out[0]


def _rows(net, log, results, chosen, skips, config):
    rows = []
    for idx, (trace, res) in enumerate(zip(log.traces, results)):
        row = {
            "trace_id": idx,
            "labels": list(log.texts(trace)),
            "frequency": trace.frequency,
            "length": len(trace.labels),
            "cost": res["cost"],
            "fitness": None if res["cost"] is None
            else fitness_of(res["cost"], len(trace.labels), skips),
            "strategy": chosen if not res.get("fallback") else "s-component+fallback",
            "conflict": res.get("conflict"),
            "error": res.get("error"),
        }
        if "n_optimal" in res:
            row["n_optimal"] = res["n_optimal"]
        if config.emit_alignments and res.get("alignment") is not None:
            row["moves"] = moves_to_dicts(net, res["alignment"])
        rows.append(row)
    return rows


def _base_report(net, log, vreport, strategy, skips, timings, rows):
    completed = [r for r in rows if r["cost"] is not None]
    weighted_cost = sum(r["frequency"] * r["cost"] for r in completed)
    wsum = sum(r["frequency"] for r in completed)
    wfit = sum(r["frequency"] * r["fitness"] for r in completed if r["fitness"] is not None)
    ufit = [r["fitness"] for r in completed if r["fitness"] is not None]
    conflicts: dict[str, int] = {}
    for r in rows:
        if r["conflict"]:
            conflicts[r["conflict"]] = conflicts.get(r["conflict"], 0) + 1
    return {
        "schema_version": SCHEMA_VERSION,
        "model": {
            "places": len(net.places),
            "transitions": len(net.transitions),
            "silent_transitions": sum(1 for t in net.transitions if t.label == 0),
            "workflow_ok": vreport.workflow_ok,
            "free_choice": vreport.free_choice,
            "uniquely_labelled": vreport.uniquely_labelled,
        },
        "log": {
            "distinct_traces": len(log.traces),
            "total_traces": log.total_traces,
            "total_events": log.total_events,
        },
        "strategy": strategy,
        "min_model_skips": skips,
        "aggregates": {
            "raw_fitness_cost": weighted_cost,
            "avg_fitness_weighted": round(wfit / wsum, 6) if wsum else None,
            "avg_fitness_unweighted": round(sum(ufit) / len(ufit), 6) if ufit else None,
            "completed_traces": len(completed),
            "failed_traces": len(rows) - len(completed),
            "conflicts": conflicts,
            "fallbacks": sum(1 for r in rows if r["strategy"].endswith("fallback")),
        },
        "timings_ms": timings,
        "traces": rows,
    }


def report_to_csv(report: dict) -> str:
    lines = ["trace_id,frequency,cost,fitness,strategy,conflict"]
    for row in report["traces"]:
        lines.append("%s,%s,%s,%s,%s,%s" % (
            row["trace_id"], row["frequency"],
            "" if row["cost"] is None else row["cost"],
            "" if row["fitness"] is None else "%.6f" % row["fitness"],
            row["strategy"], row["conflict"] or ""))
    return "\n".join(lines) + "\n"


def _write_dots(net, log, rg, aligner, dafsa, dot_dir):
    import os

    os.makedirs(dot_dir, exist_ok=True)

    def put(name, text):
        with open(os.path.join(dot_dir, name), "w") as fh:
            fh.write(text)

    put("net.dot", net_to_dot(net))
    put("dafsa.dot", dafsa_to_dot(dafsa))
    if rg is not None:
        put("rg.dot", rg_to_dot(rg))
    if aligner is not None:
        for comp, comp_rg, _ in aligner.components:
            put("component_%d.dot" % comp.index, rg_to_dot(comp_rg))
