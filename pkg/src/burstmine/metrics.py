"""Precision and recall of synthesized models against original full runs.

Node precision asks whether the length-2 action sequences a model node
permits were ever observed: for a node, every (incoming, outgoing)
transition pair contributes one candidate sequence, and a candidate counts
as correct when some original run contains those two operation labels
consecutively with the node as the intermediate abstract state.  The overall
figure is the plain mean over nodes that have both incoming and outgoing
transitions; the rest are reported as excluded rather than scored.

Trace recall is the fraction of an original run's method-call events covered
by what a technique captured: the accepted prefix for synthesized models,
the total sampled events for the fixed-length baseline.  Sampling baselines
are never scored for precision (they record verbatim, so it is 1 by
definition).
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass, field
from itertools import product

from .collect import (Run, SamplerConfig, collect_cbr_bursts,
                      collect_fixed_sampling_detailed)
from .functions import AbstractionFunction
from .model import AnnotatedFSM, ModelError, accepts_prefix, synthesize
from .states import abstract_state


@dataclass(frozen=True)
class NodeScore:
    state: str
    correct: int
    total: int

    @property
    def precision(self) -> float:
        return self.correct / self.total


@dataclass
class PrecisionReport:
    per_node: list = field(default_factory=list)  # NodeScore, node-sorted
    excluded: int = 0
    overall: float | None = None

    def to_json(self) -> str:
        return json.dumps({
            "overall": self.overall,
            "excluded_nodes": self.excluded,
            "nodes": [{"state": n.state, "correct_sequences": n.correct,
                       "total_sequences": n.total, "precision": n.precision}
                      for n in self.per_node],
        }, indent=2)

    def to_csv(self) -> str:
        lines = ["state,correct_sequences,total_sequences,precision"]
        for n in self.per_node:
            lines.append(f"{n.state},{n.correct},{n.total},{n.precision:.6f}")
        return "\n".join(lines) + "\n"


@dataclass
class RecallReport:
    per_run: list = field(default_factory=list)  # (run_id, captured, total, recall)
    mean_recall: float | None = None

    def to_json(self) -> str:
        return json.dumps({
            "mean_recall": self.mean_recall,
            "runs": [{"run": r, "captured_events": e, "total_events": eo,
                      "recall": rec} for r, e, eo, rec in self.per_run],
        }, indent=2)

    def to_csv(self) -> str:
        lines = ["run,captured_events,total_events,recall"]
        for r, e, eo, rec in self.per_run:
            lines.append(f"{r},{e},{eo},{rec:.6f}")
        return "\n".join(lines) + "\n"


def _witnesses(originals: list[Run], afs: list[AbstractionFunction],
               ) -> set[tuple[str, str, str]]:
    """(label A, label B, intermediate abstract state) triples observed as
    consecutive operations in the original runs."""
    seen: set[tuple[str, str, str]] = set()
    for run in originals:
        for a, b in zip(run.segments, run.segments[1:]):
            mid = str(abstract_state(afs, a.post_state))
            seen.add((a.label, b.label, mid))
    return seen


def node_precision(fsm: AnnotatedFSM, node, originals: list[Run],
                   afs: list[AbstractionFunction],
                   _witness_cache: "set | None" = None) -> tuple[int, int]:
    """(correct, total) length-2 sequence counts through ``node``.

    Total is |distinct incoming (label, source)| x |distinct outgoing
    (label, target)| pairs; self-loops appear on both sides.
    """
    node = str(node)
    if node not in fsm.states:
        raise ModelError(f"unknown node {node!r}")
    incoming = {(k[0], k[1]) for k in fsm.incoming(node)}
    outgoing = {(k[0], k[2]) for k in fsm.outgoing(node)}
    total = len(incoming) * len(outgoing)
    if total == 0:
        return 0, 0
    witnesses = (_witnesses(originals, afs)
                 if _witness_cache is None else _witness_cache)
    correct = sum(
        1 for (la, _), (lb, _) in product(sorted(incoming), sorted(outgoing))
        if (la, lb, node) in witnesses)
    return correct, total


def overall_precision(fsm: AnnotatedFSM, originals: list[Run],
                      afs: list[AbstractionFunction]) -> PrecisionReport:
    """Mean node precision over nodes with both incoming and outgoing
    transitions; an empty model yields an absent overall, not zero."""
    report = PrecisionReport()
    witnesses = _witnesses(originals, afs)
    scores: list[NodeScore] = []
    for state in sorted(fsm.states):
        correct, total = node_precision(fsm, state, originals, afs, witnesses)
        if total == 0:
            report.excluded += 1
            continue
        scores.append(NodeScore(state, correct, total))
    report.per_node = scores
    if scores:
        report.overall = statistics.mean(s.precision for s in scores)
    return report


def trace_recall(captured_events: int, original: Run) -> float:
    total = original.total_events
    if captured_events > total:
        raise ValueError("captured more events than the original contains")
    if total == 0:
        return 0.0
    return captured_events / total


def model_recall(fsm: AnnotatedFSM, runs: list[Run],
                 afs: list[AbstractionFunction]) -> RecallReport:
    report = RecallReport()
    for run in runs:
        captured = accepts_prefix(fsm, run, afs)
        report.per_run.append(
            (run.run_id, captured, run.total_events,
             trace_recall(captured, run)))
    if report.per_run:
        report.mean_recall = statistics.mean(r for *_, r in report.per_run)
    return report


def baseline_recall(runs: list[Run], cfg: SamplerConfig) -> RecallReport:
    """Fixed-length baseline recall: events captured from a run over its
    total, per run."""
    captured: dict[str, int] = {run.run_id: 0 for run in runs}
    for run_id, trace in collect_fixed_sampling_detailed(runs, cfg):
        captured[run_id] += len(trace)
    report = RecallReport()
    for run in runs:
        report.per_run.append(
            (run.run_id, captured[run.run_id], run.total_events,
             trace_recall(captured[run.run_id], run)))
    if report.per_run:
        report.mean_recall = statistics.mean(r for *_, r in report.per_run)
    return report


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepCell:
    probability: float
    n_runs: int
    seed: int
    overall_precision: float | None
    mean_recall: float


@dataclass
class SweepResult:
    probabilities: tuple[float, ...]
    n_runs_list: tuple[int, ...]
    seeds: tuple[int, ...]
    cells: list = field(default_factory=list)  # SweepCell, grid order

    def cell(self, p: float, n: int, seed: int) -> SweepCell:
        for c in self.cells:
            if c.probability == p and c.n_runs == n and c.seed == seed:
                return c
        raise KeyError((p, n, seed))

    def recalls(self, p: float, n: int) -> list[float]:
        return [c.mean_recall for c in self.cells
                if c.probability == p and c.n_runs == n]

    def aggregate(self, p: float, n: int) -> tuple[float, float]:
        """(mean, sample stddev) of mean recall across seeds."""
        values = self.recalls(p, n)
        mean = statistics.mean(values)
        std = statistics.stdev(values) if len(values) > 1 else 0.0
        return mean, std

    def to_csv(self) -> str:
        lines = ["p,n_runs,seed,overall_precision,mean_recall"]
        for c in self.cells:
            prec = "" if c.overall_precision is None else f"{c.overall_precision:.6f}"
            lines.append(f"{c.probability},{c.n_runs},{c.seed},{prec},"
                         f"{c.mean_recall:.6f}")
        return "\n".join(lines) + "\n"


def run_sweep(runs: list[Run], afs: list[AbstractionFunction],
              probabilities, n_runs_list, seeds) -> SweepResult:
    """Collect -> synthesize -> score for every (probability, n runs, seed)
    grid cell.  The first ``n`` runs are collected from; precision and recall
    are always measured against the full run set."""
    probabilities = tuple(probabilities)
    n_runs_list = tuple(n_runs_list)
    seeds = tuple(seeds)
    if list(probabilities) != sorted(set(probabilities)):
        raise ValueError("probability axis must be strictly increasing")
    if list(n_runs_list) != sorted(set(n_runs_list)):
        raise ValueError("run-count axis must be strictly increasing")
    if any(n > len(runs) for n in n_runs_list):
        raise ValueError("run-count axis exceeds the available runs")
    result = SweepResult(probabilities, n_runs_list, seeds)
    for p in probabilities:
        for n in n_runs_list:
            for seed in seeds:
                cfg = SamplerConfig(probability=p, rng_seed=seed, mode="cbr")
                bursts = collect_cbr_bursts(runs[:n], afs, cfg)
                fsm = synthesize(bursts)
                if fsm.n_states == 0:
                    precision = None
                    recall = 0.0
                else:
                    precision = overall_precision(fsm, runs, afs).overall
                    recall = model_recall(fsm, runs, afs).mean_recall or 0.0
                result.cells.append(SweepCell(p, n, seed, precision, recall))
    return result
