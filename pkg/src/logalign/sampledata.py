"""A small built-in loan-application example used by demos and docs.

Four checks A-D run in parallel, then the application is assessed (E) and
either rejected (F), granted (G), or sent back for more information (H, I)
and re-assessed.  The companion log holds four recorded cases.
"""

from __future__ import annotations

from .logs import EventLog, LabelTable, log_from_texts
from .petri import SystemNet


def loan_net(table: LabelTable | None = None) -> SystemNet:
    table = table if table is not None else LabelTable()
    places = ["start"] + ["p%d" % i for i in range(1, 13)] + ["end"]
    rows = [
        ("t_split", None, ["start"], ["p1", "p2", "p3", "p4"]),
        ("t_A", "A", ["p1"], ["p5"]),
        ("t_B", "B", ["p2"], ["p6"]),
        ("t_C", "C", ["p3"], ["p7"]),
        ("t_D", "D", ["p4"], ["p8"]),
        ("t_join", None, ["p5", "p6", "p7", "p8"], ["p9"]),
        ("t_E", "E", ["p9"], ["p10"]),
        ("t_F", "F", ["p10"], ["end"]),
        ("t_G", "G", ["p10"], ["p11"]),
        ("t_H", "H", ["p11"], ["p12"]),
        ("t_I", "I", ["p12"], ["p9"]),
        ("t_close", None, ["p11"], ["end"]),
    ]
    return SystemNet.build(places, rows, table)


LOAN_TRACES = [
    ["B", "D", "C", "E", "G"],
    ["B", "D", "A", "E", "F", "G"],
    ["C", "A", "B", "E", "E", "G"],
    ["C", "A", "B", "E", "H", "I", "E", "F", "G"],
]


def loan_log(table: LabelTable | None = None) -> EventLog:
    return log_from_texts(LOAN_TRACES, table)


def loan_pair() -> tuple[SystemNet, EventLog]:
    """Net and log over one shared label table."""
    table = LabelTable()
    net = loan_net(table)
    return net, loan_log(table)
