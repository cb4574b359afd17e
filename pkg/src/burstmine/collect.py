"""Burst collection over recorded runs.

"The field" here is a trace file of complete runs, each split into user
operations with concrete pre/post states.  The controlled collector draws
one uniform sample per operation (run order, then segment order, one shared
seeded stream) and, when the draw succeeds, emits the operation's events
bracketed by the abstract states of its recorded concrete states.

The uncontrolled baseline draws at operation starts only while idle and then
records a fixed number of consecutive events regardless of operation
boundaries, stopping early only at the end of the run.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from .functions import AbstractionFunction
from .states import AbstractState, ConcreteState, StateError, abstract_state

SRT_CATEGORIES = ("Instantaneous", "Immediate", "Continuous", "Captive")


class TraceSchemaError(ValueError):
    def __init__(self, message: str, record: int | None = None) -> None:
        prefix = f"record {record}: " if record is not None else ""
        super().__init__(prefix + message)
        self.record = record


@dataclass(frozen=True)
class MethodCall:
    method: str
    class_name: str
    params: tuple = ()

    def to_dict(self) -> dict:
        return {"method": self.method, "class": self.class_name,
                "params": list(self.params)}

    @staticmethod
    def from_dict(d: dict) -> "MethodCall":
        return MethodCall(d["method"], d["class"], tuple(d.get("params", ())))

    def __str__(self) -> str:
        args = ", ".join(repr(p) for p in self.params)
        return f"{self.class_name}.{self.method}({args})"


Trace = tuple[MethodCall, ...]


@dataclass(frozen=True)
class OperationSegment:
    label: str
    events: Trace
    pre_state: ConcreteState
    post_state: ConcreteState
    srt_category: str = "Instantaneous"

    def __post_init__(self) -> None:
        if self.srt_category not in SRT_CATEGORIES:
            raise TraceSchemaError(
                f"srt_category {self.srt_category!r} not in {SRT_CATEGORIES}")


@dataclass(frozen=True)
class Run:
    run_id: str
    segments: tuple[OperationSegment, ...] = ()

    @property
    def total_events(self) -> int:
        return sum(len(s.events) for s in self.segments)


@dataclass(frozen=True)
class Burst:
    label: str
    pre: AbstractState
    trace: Trace
    post: AbstractState

    def __post_init__(self) -> None:
        if self.pre.af_hash != self.post.af_hash:
            raise ValueError("burst pre/post states use different AF orderings")


@dataclass(frozen=True)
class SamplerConfig:
    probability: float
    rng_seed: int = 0
    mode: str = "cbr"
    fixed_length: int = 30

    def __post_init__(self) -> None:
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError("probability must be within [0, 1]")
        if self.mode not in ("cbr", "fixed_length"):
            raise ValueError(f"unknown sampler mode {self.mode!r}")
        if self.mode == "fixed_length" and self.fixed_length <= 0:
            raise ValueError("fixed_length must be positive")

    def to_dict(self) -> dict:
        return {"probability": self.probability, "rng_seed": self.rng_seed,
                "mode": self.mode, "fixed_length": self.fixed_length}

    @staticmethod
    def from_dict(d: dict) -> "SamplerConfig":
        return SamplerConfig(float(d["probability"]), int(d.get("rng_seed", 0)),
                             d.get("mode", "cbr"), int(d.get("fixed_length", 30)))


# ---------------------------------------------------------------------------
# Trace files (JSONL: {"run": id} lines open runs, {"segment": {...}} lines
# append to the current run)
# ---------------------------------------------------------------------------


def _segment_from_dict(d: dict, record: int) -> OperationSegment:
    for key in ("label", "pre_state", "events", "post_state"):
        if key not in d:
            raise TraceSchemaError(f"segment missing {key!r}", record)
    try:
        pre = ConcreteState.from_dict(d["pre_state"])
        post = ConcreteState.from_dict(d["post_state"])
    except StateError as exc:
        raise TraceSchemaError(str(exc), record) from exc
    events = tuple(MethodCall.from_dict(e) for e in d["events"])
    try:
        return OperationSegment(d["label"], events, pre, post,
                                d.get("srt_category", "Instantaneous"))
    except TraceSchemaError as exc:
        raise TraceSchemaError(str(exc), record) from exc


def loads_runs(text: str) -> list[Run]:
    runs: list[Run] = []
    current_id: str | None = None
    current_segments: list[OperationSegment] = []

    def close() -> None:
        nonlocal current_id, current_segments
        if current_id is not None:
            runs.append(Run(current_id, tuple(current_segments)))
        current_id, current_segments = None, []

    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceSchemaError(f"invalid JSON: {exc}", lineno) from exc
        if "run" in doc:
            close()
            current_id = str(doc["run"])
        elif "segment" in doc:
            if current_id is None:
                raise TraceSchemaError("segment before any run line", lineno)
            current_segments.append(_segment_from_dict(doc["segment"], lineno))
        else:
            raise TraceSchemaError("line is neither a run nor a segment", lineno)
    close()
    return runs


def load_runs(path) -> list[Run]:
    """Read a trace file; schema violations carry the offending record index."""
    with open(path, "r", encoding="utf-8") as fh:
        return loads_runs(fh.read())


def dumps_runs(runs: list[Run]) -> str:
    lines: list[str] = []
    for run in runs:
        lines.append(json.dumps({"run": run.run_id}))
        for seg in run.segments:
            lines.append(json.dumps({"segment": {
                "label": seg.label,
                "srt_category": seg.srt_category,
                "pre_state": seg.pre_state.to_dict(),
                "events": [e.to_dict() for e in seg.events],
                "post_state": seg.post_state.to_dict(),
            }}))
    return "\n".join(lines) + ("\n" if lines else "")


def dump_runs(runs: list[Run], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_runs(runs))


# ---------------------------------------------------------------------------
# Collectors
# ---------------------------------------------------------------------------


def collect_cbr_bursts(runs: list[Run], afs: list[AbstractionFunction],
                       cfg: SamplerConfig) -> list[Burst]:
    """One draw per user operation; successful draws emit state-bracketed
    bursts in encounter order.  Identical inputs (seed included) give
    identical output."""
    if cfg.mode != "cbr":
        raise ValueError("collect_cbr_bursts needs a cbr-mode config")
    rng = random.Random(cfg.rng_seed)
    bursts: list[Burst] = []
    for run in runs:
        for seg in run.segments:
            if rng.random() < cfg.probability:
                bursts.append(Burst(
                    seg.label,
                    abstract_state(afs, seg.pre_state),
                    seg.events,
                    abstract_state(afs, seg.post_state)))
    return bursts


AttributedTrace = tuple[str, Trace]  # (run id, events)


def collect_fixed_sampling_detailed(runs: list[Run], cfg: SamplerConfig,
                                    ) -> list[AttributedTrace]:
    """Fixed-length baseline with run attribution: (run_id, events) pairs.

    A draw happens at a segment start only while idle; once recording, the
    monitor keeps appending events across segment boundaries until it has
    ``fixed_length`` of them or the run ends.
    """
    if cfg.mode != "fixed_length":
        raise ValueError("collect_fixed_sampling needs a fixed_length-mode config")
    rng = random.Random(cfg.rng_seed)
    out: list[AttributedTrace] = []
    for run in runs:
        recording: list[MethodCall] | None = None
        for seg in run.segments:
            if recording is None:
                if rng.random() < cfg.probability:
                    recording = []
            if recording is None:
                continue
            for event in seg.events:
                recording.append(event)
                if len(recording) == cfg.fixed_length:
                    out.append((run.run_id, tuple(recording)))
                    recording = None
                    break
        if recording:
            out.append((run.run_id, tuple(recording)))  # truncated at run end
    return out


def collect_fixed_sampling(runs: list[Run], cfg: SamplerConfig) -> list[Trace]:
    """Uncontrolled baseline: unlabeled, state-free fixed-length event traces."""
    return [trace for _, trace in collect_fixed_sampling_detailed(runs, cfg)]


# ---------------------------------------------------------------------------
# Burst files (JSONL with a header line)
# ---------------------------------------------------------------------------


def dumps_bursts(bursts: list[Burst], cfg: SamplerConfig | None = None,
                 af_hash: str | None = None) -> str:
    if af_hash is None:
        af_hash = bursts[0].pre.af_hash if bursts else ""
    header: dict = {"af_hash": af_hash}
    if cfg is not None:
        header["sampler"] = cfg.to_dict()
    lines = [json.dumps({"header": header})]
    for b in bursts:
        lines.append(json.dumps({
            "label": b.label,
            "pre": str(b.pre),
            "trace": [e.to_dict() for e in b.trace],
            "post": str(b.post),
        }))
    return "\n".join(lines) + "\n"


def loads_bursts(text: str) -> tuple[list[Burst], dict]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise TraceSchemaError("empty burst document")
    head = json.loads(lines[0])
    if "header" not in head:
        raise TraceSchemaError("burst file must start with a header line", 1)
    af_hash = head["header"].get("af_hash", "")
    bursts: list[Burst] = []
    for lineno, line in enumerate(lines[1:], start=2):
        d = json.loads(line)
        try:
            bursts.append(Burst(
                d["label"],
                AbstractState.from_string(d["pre"], af_hash),
                tuple(MethodCall.from_dict(e) for e in d["trace"]),
                AbstractState.from_string(d["post"], af_hash)))
        except (KeyError, ValueError) as exc:
            raise TraceSchemaError(str(exc), lineno) from exc
    return bursts, head["header"]
