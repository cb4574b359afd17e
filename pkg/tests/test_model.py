import json
import random

import pytest

from burstmine.collect import Burst, MethodCall, SamplerConfig, collect_cbr_bursts
from burstmine.model import (ModelError, accepts_prefix,
                             export_fsm, import_fsm, simulate_traces,
                             synthesize, with_transition)
from burstmine.states import AbstractState
from burstmine.synthetic import (PS_EMPTY, PS_FILLING, PS_PAID,
                                 checkout_abstraction_functions,
                                 checkout_reference_bursts, checkout_runs,
                                 editor_abstraction_functions,
                                 generate_editor_runs)


def mk_burst(label, pre, post, trace=(), h="h1"):
    return Burst(label, AbstractState.from_string(pre, h),
                 tuple(trace), AbstractState.from_string(post, h))


def call(name):
    return MethodCall(name, "Cart", ())


# --- synthesize -------------------------------------------------------------

def test_synthesize_two_bursts_three_states():
    bursts = [mk_burst("clickOnAddItem", "UU", "UF", [call("addItem")]),
              mk_burst("clickOnPay", "UF", "FF", [call("applyDiscount")])]
    fsm = synthesize(bursts)
    assert fsm.n_states == 3
    assert fsm.n_transitions == 2
    assert set(fsm.transitions) == {("clickOnAddItem", "UU", "UF"),
                                    ("clickOnPay", "UF", "FF")}


def test_synthesize_empty():
    fsm = synthesize([])
    assert fsm.n_states == 0 and fsm.n_transitions == 0


def test_same_triple_different_traces_one_transition():
    bursts = [mk_burst("op", "TF", "FT", [call("a")]),
              mk_burst("op", "TF", "FT", [call("b")]),
              mk_burst("op", "TF", "FT", [call("a")])]  # duplicate trace
    fsm = synthesize(bursts)
    key = ("op", "TF", "FT")
    assert fsm.n_transitions == 1
    assert fsm.annotations(key) == ((call("a"),), (call("b"),))


def test_synthesize_order_insensitive():
    afs = editor_abstraction_functions()
    runs = generate_editor_runs(4, master_seed=3)
    bursts = collect_cbr_bursts(runs, afs, SamplerConfig(0.8, 1))
    shuffled = bursts[:]
    random.Random(0).shuffle(shuffled)
    a, b = synthesize(bursts), synthesize(shuffled)
    assert a.states == b.states
    assert set(a.transitions) == set(b.transitions)
    for key in a.transitions:
        assert set(a.annotations(key)) == set(b.annotations(key))


def test_synthesize_hash_mismatch():
    bursts = [mk_burst("a", "T", "F", h="h1"), mk_burst("b", "T", "F", h="h2")]
    with pytest.raises(ModelError):
        synthesize(bursts)


def test_every_burst_trace_lands_in_exactly_one_transition():
    afs = editor_abstraction_functions()
    runs = generate_editor_runs(3, master_seed=5)
    bursts = collect_cbr_bursts(runs, afs, SamplerConfig(1.0, 0))
    fsm = synthesize(bursts)
    assert fsm.n_states <= 2 * len({(str(b.pre), str(b.post)) for b in bursts})
    for b in bursts:
        holders = [k for k, traces in fsm.transitions.items() if b.trace in traces
                   and k == (b.label, str(b.pre), str(b.post))]
        assert len(holders) == 1


# --- simulate_traces ----------------------------------------------------------

def checkout_fsm():
    return synthesize(checkout_reference_bursts())


def test_simulate_includes_add_then_pay():
    fsm = checkout_fsm()
    traces = simulate_traces(fsm, PS_EMPTY, max_hops=2)
    label_seqs = {t.labels: t for t in traces}
    t = label_seqs.get(("clickOnAddItem", "clickOnPay"))
    assert t is not None and t.end == PS_PAID
    methods = [e.method for e in t.events]
    assert "addItem" in methods and "applyDiscount" in methods \
        and "calculateTotal" in methods


def test_simulate_zero_hops():
    fsm = checkout_fsm()
    traces = simulate_traces(fsm, PS_FILLING, max_hops=0)
    assert len(traces) == 1
    assert traces[0].segments == () and traces[0].end == PS_FILLING


def test_simulate_dead_end_state():
    fsm = synthesize([mk_burst("go", "TT", "FF", [call("a")])])
    traces = simulate_traces(fsm, "FF", max_hops=5)
    assert len(traces) == 1 and traces[0].segments == ()


def test_simulate_unknown_start():
    with pytest.raises(ModelError):
        simulate_traces(checkout_fsm(), "TTT", 1)


def test_simulate_connectivity_and_budget():
    fsm = checkout_fsm()
    traces = simulate_traces(fsm, PS_EMPTY, max_hops=4)
    for t in traces:
        state = t.start
        for label, trace in t.segments:
            key = next(k for k in fsm.transitions
                       if k[0] == label and k[1] == state and trace in fsm.transitions[k])
            state = key[2]
        assert state == t.end
    capped = simulate_traces(fsm, PS_EMPTY, max_hops=12, combination_budget=5)
    assert len(capped) == 5
    assert capped == simulate_traces(fsm, PS_EMPTY, max_hops=12, combination_budget=5)


# --- accepts_prefix --------------------------------------------------------------

def test_self_acceptance_at_certainty():
    afs = checkout_abstraction_functions()
    runs = checkout_runs()
    fsm = synthesize(collect_cbr_bursts(runs, afs, SamplerConfig(1.0, 0)))
    for run in runs:
        assert accepts_prefix(fsm, run, afs) == run.total_events


def test_empty_fsm_accepts_nothing():
    afs = checkout_abstraction_functions()
    runs = checkout_runs()
    assert accepts_prefix(synthesize([]), runs[0], afs) == 0


def test_missing_transition_stops_prefix():
    afs = checkout_abstraction_functions()
    runs = checkout_runs()
    bursts = collect_cbr_bursts(runs, afs, SamplerConfig(1.0, 0))
    run = runs[1]  # addItem, addItem, pay, newSession
    second_add = ("clickOnAddItem", PS_FILLING, PS_FILLING)
    kept = [b for b in bursts
            if (b.label, str(b.pre), str(b.post)) != second_add]
    fsm = synthesize(kept)
    # brute-force walk oracle: only the first segment is accepted
    assert accepts_prefix(fsm, run, afs) == len(run.segments[0].events)


def test_accepts_prefix_hash_guard():
    afs = checkout_abstraction_functions()
    runs = checkout_runs()
    other = editor_abstraction_functions()
    fsm = synthesize(collect_cbr_bursts(runs, afs, SamplerConfig(1.0, 0)))
    with pytest.raises(ModelError):
        accepts_prefix(fsm, runs[0], other)


# --- export / import ----------------------------------------------------------

def test_export_json_roundtrip():
    fsm = checkout_fsm()
    again = import_fsm(export_fsm(fsm, "json"))
    assert again.af_hash == fsm.af_hash
    assert again.states == fsm.states
    assert again.transitions == fsm.transitions


def test_export_empty_fsm():
    fsm = synthesize([])
    doc = json.loads(export_fsm(fsm, "json"))
    assert doc["states"] == [] and doc["transitions"] == []
    dot = export_fsm(fsm, "dot")
    assert dot.startswith("digraph") and dot.rstrip().endswith("}")


def test_export_dot_shape():
    bursts = [mk_burst("clickOnAddItem", "UU", "UF", [call("addItem")]),
              mk_burst("clickOnPay", "UF", "FF", [call("applyDiscount")])]
    dot = export_fsm(synthesize(bursts), "dot")
    node_lines = [ln for ln in dot.splitlines() if "[label=\"(" in ln]
    edge_lines = [ln for ln in dot.splitlines() if "->" in ln]
    assert len(node_lines) == 3 and len(edge_lines) == 2


def test_export_unknown_format():
    with pytest.raises(ModelError):
        export_fsm(checkout_fsm(), "yaml")


def test_with_transition_adds_endpoints():
    fsm = checkout_fsm()
    bigger = with_transition(fsm, "clickOnAddItem", PS_PAID, PS_EMPTY)
    assert ("clickOnAddItem", PS_PAID, PS_EMPTY) in bigger.transitions
    assert bigger.n_transitions == fsm.n_transitions + 1
