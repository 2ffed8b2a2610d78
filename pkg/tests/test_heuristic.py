from logalign.heuristic import precompute_future_labels
from logalign.logs import LabelTable
from logalign.petri import SystemNet
from logalign.reachability import build_rg, remove_tau
from logalign.sampledata import loan_net

from nets import sequence_net


def counts(table, word):
    out = {}
    for x in word:
        lid = table.lookup(x)
        out[lid] = out.get(lid, 0) + 1
    return out


def test_final_marking_future_is_empty_multiset():
    rg = remove_tau(build_rg(sequence_net(["A", "B"])))
    table = precompute_future_labels(rg)
    (final,) = rg.finals
    assert table.entries[final] == (((), frozenset()),)
    assert table.h({}, final) == 0


def test_loan_estimates_after_first_move():
    net = loan_net()
    rg = remove_tau(build_rg(net))
    ftable = precompute_future_labels(rg)
    after_b = next(a.tgt for k in rg.out[rg.m0]
                   for a in [rg.arcs[k]] if net.table.text(a.label) == "B")
    # matched B on (B,D,C,E,G): remaining (C,D,E,G) is one skip away (A)
    assert ftable.h(counts(net.table, "CDEG"), after_b) == 1
    # hid B instead: the whole trace remains, two moves of mismatch
    assert ftable.h(counts(net.table, "BCDEG"), after_b) == 2
    # at the initial marking the B,D,C,E,G trace needs at least one skip
    assert ftable.h(counts(net.table, "BDCEG"), rg.m0) == 1


def test_cyclic_labels_absorb_repetitions():
    # single visible task in a redo loop: A can repeat any number of times
    table = LabelTable()
    net = SystemNet.build(
        ["i", "p", "q", "o"],
        [("t_in", None, ["i"], ["p"]),
         ("t_A", "A", ["p"], ["q"]),
         ("t_redo", None, ["q"], ["p"]),
         ("t_out", None, ["q"], ["o"])],
        table)
    rg = remove_tau(build_rg(net))
    ftable = precompute_future_labels(rg)
    a = table.lookup("A")
    # any number of pending A's is free, but a foreign label still costs
    assert ftable.h({a: 5}, rg.m0) == 0
    b = table.intern("B")
    assert ftable.h({a: 2, b: 1}, rg.m0) == 1


def test_estimate_never_exceeds_true_cost_on_loan():
    from logalign.oracle import brute_force_optimal_cost

    net = loan_net()
    rg = remove_tau(build_rg(net))
    ftable = precompute_future_labels(rg)
    for word in ["BDCEG", "BDAEFG", "CABEEG", "G", ""]:
        trace = tuple(net.table.lookup(x) for x in word)
        cost, _ = brute_force_optimal_cost(trace, rg)
        assert ftable.h(counts(net.table, word), rg.m0) <= cost
