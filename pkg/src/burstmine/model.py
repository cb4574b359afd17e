"""Annotated finite-state model synthesis and queries.

States are abstract program states (ternary vectors, handled in their string
form); a transition is a (label, from, to) triple carrying the set of method
call traces observed for it.  There are no initial or final states: the model
is a join structure over whatever bursts were recorded, and reconstruction
chains bursts through shared states.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .collect import Burst, MethodCall, Run, Trace
from .functions import AbstractionFunction, af_list_hash
from .states import abstract_state


class ModelError(ValueError):
    pass


TransitionKey = tuple[str, str, str]  # (label, from state, to state)


@dataclass(frozen=True)
class AnnotatedFSM:
    af_hash: str
    states: frozenset[str]
    transitions: dict  # TransitionKey -> tuple[Trace, ...] (first-seen order)

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_transitions(self) -> int:
        return len(self.transitions)

    def annotations(self, key: TransitionKey) -> tuple[Trace, ...]:
        return self.transitions[key]

    def outgoing(self, state: str) -> list[TransitionKey]:
        keys = [k for k in self.transitions if k[1] == state]
        return sorted(keys, key=lambda k: (k[0], k[2]))

    def incoming(self, state: str) -> list[TransitionKey]:
        keys = [k for k in self.transitions if k[2] == state]
        return sorted(keys, key=lambda k: (k[0], k[1]))


def synthesize(bursts: list[Burst]) -> AnnotatedFSM:
    """Union of burst endpoints as states; one transition per distinct
    (label, pre, post); annotation sets union the traces (duplicates once).

    The result does not depend on burst order beyond annotation insertion
    order, which is first-seen."""
    af_hash = ""
    states: set[str] = set()
    transitions: dict[TransitionKey, list[Trace]] = {}
    seen: dict[TransitionKey, set[Trace]] = {}
    for b in bursts:
        if af_hash and b.pre.af_hash != af_hash:
            raise ModelError("bursts mix different AF orderings")
        af_hash = af_hash or b.pre.af_hash
        pre, post = str(b.pre), str(b.post)
        states.add(pre)
        states.add(post)
        key = (b.label, pre, post)
        bucket = transitions.setdefault(key, [])
        dedup = seen.setdefault(key, set())
        if b.trace not in dedup:
            dedup.add(b.trace)
            bucket.append(b.trace)
    return AnnotatedFSM(af_hash, frozenset(states),
                        {k: tuple(v) for k, v in transitions.items()})


def with_transition(fsm: AnnotatedFSM, label: str, frm: str, to: str,
                    traces: tuple[Trace, ...] = ((),)) -> AnnotatedFSM:
    """A copy of the model with one extra annotated transition (handy for
    what-if precision analyses)."""
    transitions = dict(fsm.transitions)
    key = (label, frm, to)
    existing = transitions.get(key, ())
    merged = existing + tuple(t for t in traces if t not in existing)
    transitions[key] = merged if merged else ((),)
    return AnnotatedFSM(fsm.af_hash, fsm.states | {frm, to}, transitions)


@dataclass(frozen=True)
class ReconstructedTrace:
    start: str
    segments: tuple[tuple[str, Trace], ...]  # (label, events) per hop
    end: str

    @property
    def events(self) -> Trace:
        return tuple(e for _, trace in self.segments for e in trace)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.segments)


def simulate_traces(fsm: AnnotatedFSM, start, max_hops: int,
                    combination_budget: int = 10_000,
                    ) -> list[ReconstructedTrace]:
    """Depth-first enumeration of maximal walks from ``start`` (up to
    ``max_hops`` transitions, shorter only at dead ends), expanded per
    combination of one annotation trace per hop.

    Transitions are visited sorted by (label, target state) and annotations
    in first-seen order, so output order is deterministic; the combination
    budget caps the cross-product explosion.
    """
    start = str(start)
    if start not in fsm.states:
        raise ModelError(f"unknown start state {start!r}")
    out: list[ReconstructedTrace] = []

    def walk(state: str, hops_left: int, acc: tuple) -> None:
        if len(out) >= combination_budget:
            return
        keys = fsm.outgoing(state) if hops_left > 0 else []
        if not keys:
            out.append(ReconstructedTrace(start, acc, state))
            return
        for key in keys:
            label, _, target = key
            for trace in fsm.annotations(key):
                if len(out) >= combination_budget:
                    return
                walk(target, hops_left - 1, acc + ((label, trace),))

    walk(start, max_hops, ())
    return out


def accepts_prefix(fsm: AnnotatedFSM, run: Run,
                   afs: list[AbstractionFunction]) -> int:
    """Number of events in the longest run prefix the model accepts.

    Each segment must be matched by a transition with the same label whose
    endpoints equal the segment's abstract pre/post states and whose
    annotation set contains the segment's exact event list.
    """
    if fsm.af_hash and af_list_hash(afs) != fsm.af_hash:
        raise ModelError("AF list does not match the model's AF ordering")
    accepted = 0
    for seg in run.segments:
        key = (seg.label,
               str(abstract_state(afs, seg.pre_state)),
               str(abstract_state(afs, seg.post_state)))
        if key not in fsm.transitions:
            break
        if seg.events not in fsm.transitions[key]:
            break
        accepted += len(seg.events)
    return accepted


# ---------------------------------------------------------------------------
# Export / import
# ---------------------------------------------------------------------------


def export_fsm(fsm: AnnotatedFSM, fmt: str = "json") -> str:
    if fmt == "json":
        return _to_json(fsm)
    if fmt == "dot":
        return _to_dot(fsm)
    raise ModelError(f"unknown export format {fmt!r}")


def _to_json(fsm: AnnotatedFSM) -> str:
    transitions = []
    for key in sorted(fsm.transitions):
        label, frm, to = key
        transitions.append({
            "label": label, "from": frm, "to": to,
            "traces": [[e.to_dict() for e in trace]
                       for trace in fsm.transitions[key]],
        })
    return json.dumps({
        "af_hash": fsm.af_hash,
        "states": sorted(fsm.states),
        "transitions": transitions,
    }, indent=2)


def import_fsm(text: str) -> AnnotatedFSM:
    doc = json.loads(text)
    transitions: dict[TransitionKey, tuple[Trace, ...]] = {}
    for t in doc["transitions"]:
        key = (t["label"], t["from"], t["to"])
        transitions[key] = tuple(
            tuple(MethodCall.from_dict(e) for e in trace) for trace in t["traces"])
    return AnnotatedFSM(doc.get("af_hash", ""), frozenset(doc["states"]),
                        transitions)


def _to_dot(fsm: AnnotatedFSM) -> str:
    lines = ["digraph bursts {", "  rankdir=LR;", "  node [shape=ellipse];"]
    names = {s: f"s{i}" for i, s in enumerate(sorted(fsm.states))}
    for state in sorted(fsm.states):
        lines.append(f'  {names[state]} [label="({", ".join(state)})"];')
    for key in sorted(fsm.transitions):
        label, frm, to = key
        count = len(fsm.transitions[key])
        lines.append(
            f'  {names[frm]} -> {names[to]} [label="{label} ({count})"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
