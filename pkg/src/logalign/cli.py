"""Command-line entry point.

    logalign check --log L.xes --model M.pnml [--strategy auto] [--out report.json]

reads an event log (XES, or the one-trace-per-line text fallback) and a
PNML workflow net, runs conformance checking and writes a JSON report plus
an optional per-trace CSV.  Exit codes: 0 success, 2 unusable input,
3 global timeout, 4 state-space cap hit with the monolithic strategy forced.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import LogAlignError
from .logs import LabelTable, parse_text_log, parse_xes
from .petri import parse_pnml
from .reachability import DEFAULT_MARKING_CAP, build_rg, remove_tau
from .report import (EXIT_INPUT_ERROR, RunConfig, report_to_csv, run_conformance)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="logalign")
    sub = parser.add_subparsers(dest="command", required=True, metavar="check")

    check = sub.add_parser("check", help="align an event log against a workflow net")
    check.add_argument("--log", required=True, help="XES file (or .txt fallback)")
    check.add_argument("--model", required=True, help="PNML file")
    check.add_argument("--strategy", choices=["auto", "monolithic", "scomponent"],
                       default="auto")
    check.add_argument("--all-optimal", action="store_true",
                       help="enumerate all optimal alignments (monolithic only)")
    check.add_argument("--no-memo", action="store_true",
                       help="disable reuse of shared prefix/suffix computations")
    check.add_argument("--threads", type=int, default=1)
    check.add_argument("--timeout-ms", type=int, default=None,
                       help="per-trace alignment deadline")
    check.add_argument("--global-timeout-ms", type=int, default=None)
    check.add_argument("--state-cap", type=int, default=DEFAULT_MARKING_CAP,
                       help="maximum number of reachable markings to expand")
    check.add_argument("--out", default=None, help="write the JSON report here")
    check.add_argument("--csv", default=None, help="write the per-trace CSV here")
    check.add_argument("--emit-alignments", action="store_true",
                       help="include move lists in the report")
    check.add_argument("--dot-dir", default=None, help="dump debug graphs here")

    oracle = sub.add_parser("oracle")  # fixture generation; not advertised
    oracle.add_argument("--log", required=True)
    oracle.add_argument("--model", required=True)
    return parser


def _load_inputs(log_path: str, model_path: str):
    table = LabelTable()
    with open(model_path, "rb") as fh:
        net = parse_pnml(fh.read(), table)
    with open(log_path, "rb") as fh:
        data = fh.read()
    if data.lstrip()[:1] == b"<":
        log = parse_xes(data, table)
    else:
        log = parse_text_log(data.decode("utf-8"), table)
    return net, log


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        net, log = _load_inputs(args.log, args.model)
    except (LogAlignError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_INPUT_ERROR

    if args.command == "oracle":
        return _run_oracle(net, log)

    config = RunConfig(
        strategy=args.strategy,
        all_optimal=args.all_optimal,
        memo=not args.no_memo,
        threads=max(1, args.threads),
        timeout_ms=args.timeout_ms,
        global_timeout_ms=args.global_timeout_ms,
        state_cap=args.state_cap,
        emit_alignments=args.emit_alignments,
        dot_dir=args.dot_dir,
    )
    result = run_conformance(net, log, config)
    text = json.dumps(result.report, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(report_to_csv(result.report))
    return result.exit_code


def _run_oracle(net, log) -> int:
    from .oracle import brute_force_optimal_cost

    try:
        rg = remove_tau(build_rg(net))
    except LogAlignError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_INPUT_ERROR
    for idx, trace in enumerate(log.traces):
        cost, _ = brute_force_optimal_cost(trace.labels, rg)
        print("%d\t%d\t%s" % (idx, cost, ",".join(log.texts(trace))))
    return 0


if __name__ == "__main__":
    sys.exit(main())
