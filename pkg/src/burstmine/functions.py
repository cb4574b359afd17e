"""Clause and abstraction-function value types shared across the pipeline.

A clause is a single comparison over state-variable paths, array lengths,
parameters, and literals.  An abstraction function is an ordered,
parameter-free conjunction of clauses produced by stripping a symbolic
path condition; evaluated against a concrete state it yields a ternary
true / false / unknown.

This module owns the wire format for abstraction-function lists (a JSON
document with a header recording extraction bounds and truncation flags),
which every downstream stage consumes.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Union

COMPARE_OPS = ("==", "!=", "<", "<=", ">", ">=")

_MIRROR = {"==": "!=", "!=": "==", "<": ">=", ">=": "<", ">": "<=", "<=": ">"}


@dataclass(frozen=True)
class IntTerm:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class BoolTerm:
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


@dataclass(frozen=True)
class NullTerm:
    def __str__(self) -> str:
        return "null"


@dataclass(frozen=True)
class FieldTerm:
    """State-variable path rooted at a class name.

    Segments are ``("field", name)``, ``("index", int | FieldTerm)``, or
    ``("length", None)``.  Indices are concrete integers except when a
    program indexes an array with an integer field path.
    """

    root: str
    segments: tuple[tuple[str, object], ...] = ()

    @property
    def is_length(self) -> bool:
        return bool(self.segments) and self.segments[-1][0] == "length"

    def __str__(self) -> str:
        parts = [self.root]
        for kind, payload in self.segments:
            if kind == "field":
                parts.append(str(payload))
            elif kind == "index":
                parts.append(f"[{payload}]")
            else:
                parts.append("length")
        return ".".join(parts)


@dataclass(frozen=True)
class ParamTerm:
    """Method-parameter reference (possibly with field accesses)."""

    root: str
    segments: tuple[str, ...] = ()

    def __str__(self) -> str:
        return ".".join((self.root,) + self.segments)


Term = Union[IntTerm, BoolTerm, NullTerm, FieldTerm, ParamTerm]


def term_to_str(t: Term) -> str:
    return str(t)


def parse_term(text: str) -> Term:
    """Inverse of :func:`term_to_str` (used by the AF JSON reader)."""
    if text == "null":
        return NullTerm()
    if text == "true":
        return BoolTerm(True)
    if text == "false":
        return BoolTerm(False)
    if re_int(text):
        return IntTerm(int(text))
    parts = _split_path(text)
    root = parts[0]
    if root[:1].isupper():
        segments: list[tuple[str, object]] = []
        for p in parts[1:]:
            if p == "length":
                segments.append(("length", None))
            elif p.startswith("["):
                inner = p[1:-1]
                idx: object = int(inner) if re_int(inner) else parse_term(inner)
                segments.append(("index", idx))
            else:
                segments.append(("field", p))
        return FieldTerm(root, tuple(segments))
    return ParamTerm(root, tuple(parts[1:]))


def re_int(s: str) -> bool:
    return s.lstrip("-").isdigit()


def _split_path(text: str) -> list[str]:
    """Split a dotted path, keeping bracketed indices whole."""
    parts: list[str] = []
    buf = ""
    depth = 0
    for ch in text:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "." and depth == 0:
            parts.append(buf)
            buf = ""
        else:
            buf += ch
    parts.append(buf)
    return parts


@dataclass(frozen=True)
class Clause:
    """One comparison; ``negated`` marks a not-yet-folded negation."""

    lhs: Term
    op: str
    rhs: Term
    negated: bool = False

    def __post_init__(self) -> None:
        if self.op not in COMPARE_OPS:
            raise ValueError(f"unknown comparison operator {self.op!r}")

    def normalized(self) -> "Clause":
        """Fold negation into the operator, canonicalize boolean-literal and
        array-length comparisons.  Form is preserved otherwise (operands are
        not reordered)."""
        op = _MIRROR[self.op] if self.negated else self.op
        lhs, rhs = self.lhs, self.rhs
        # x != true  ->  x == false ; x != false -> x == true
        if op == "!=" and isinstance(rhs, BoolTerm):
            op, rhs = "==", BoolTerm(not rhs.value)
        if op == "!=" and isinstance(lhs, BoolTerm):
            op, lhs = "==", BoolTerm(not lhs.value)
        # Array lengths are non-negative: len <= 0 -> len == 0, len != 0 -> len > 0.
        if isinstance(lhs, FieldTerm) and lhs.is_length and isinstance(rhs, IntTerm):
            if rhs.value == 0 and op == "<=":
                op = "=="
            elif rhs.value == 0 and op == "!=":
                op = ">"
        return Clause(lhs, op, rhs, False)

    def mirrored(self) -> "Clause":
        """The normalized negation of this clause."""
        n = self.normalized()
        return Clause(n.lhs, n.op, n.rhs, True).normalized()

    def key(self) -> str:
        n = self.normalized()
        return f"{n.lhs} {n.op} {n.rhs}"

    def mentions_parameter(self) -> bool:
        if isinstance(self.lhs, ParamTerm) or isinstance(self.rhs, ParamTerm):
            return True
        return _index_mentions_param(self.lhs) or _index_mentions_param(self.rhs)

    def references_state(self) -> bool:
        return isinstance(self.lhs, (FieldTerm, ParamTerm)) or isinstance(
            self.rhs, (FieldTerm, ParamTerm))

    def __str__(self) -> str:
        n = self.normalized()
        return f"{n.lhs} {n.op} {n.rhs}"

    def to_dict(self) -> dict:
        return {"lhs": str(self.lhs), "op": self.op, "rhs": str(self.rhs),
                "negated": self.negated}

    @staticmethod
    def from_dict(d: dict) -> "Clause":
        return Clause(parse_term(d["lhs"]), d["op"], parse_term(d["rhs"]),
                      bool(d.get("negated", False)))


def _index_mentions_param(t: Term) -> bool:
    if not isinstance(t, FieldTerm):
        return False
    for kind, payload in t.segments:
        if kind == "index" and isinstance(payload, ParamTerm):
            return True
    return False


@dataclass(frozen=True)
class PathCondition:
    """Conjunction of branch guards for one explored path of one method."""

    clauses: tuple[Clause, ...]
    origin: tuple[str, str, str]  # (class, method, path id)
    truncated: bool = False

    def __str__(self) -> str:
        return " && ".join(str(c) for c in self.clauses) if self.clauses else "true"


@dataclass(frozen=True)
class AbstractionFunction:
    """Parameter-free conjunction of clauses with a stable id."""

    id: str
    clauses: tuple[Clause, ...]
    origin: tuple[str, str, str]

    def __post_init__(self) -> None:
        if not self.clauses:
            raise ValueError("abstraction function needs at least one clause")
        for c in self.clauses:
            if c.mentions_parameter():
                raise ValueError(f"clause {c} references a parameter")

    @property
    def class_name(self) -> str:
        return self.origin[0]

    @property
    def method_name(self) -> str:
        return self.origin[1]

    def clause_keys(self) -> tuple[str, ...]:
        return tuple(c.key() for c in self.clauses)

    def clause_set(self) -> frozenset[str]:
        return frozenset(self.clause_keys())

    def __str__(self) -> str:
        return " && ".join(str(c) for c in self.clauses)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "class": self.class_name,
            "method": self.method_name,
            "clauses": [c.normalized().to_dict() for c in self.clauses],
        }

    @staticmethod
    def from_dict(d: dict) -> "AbstractionFunction":
        return AbstractionFunction(
            d["id"],
            tuple(Clause.from_dict(c) for c in d["clauses"]),
            (d["class"], d["method"], d.get("path", "")),
        )


def af_list_hash(afs: "list[AbstractionFunction] | tuple[AbstractionFunction, ...]",
                 ) -> str:
    """Digest binding an abstract-state vector to its function ordering."""
    h = hashlib.sha256("\n".join(af.id for af in afs).encode("utf-8"))
    return h.hexdigest()[:16]


def dump_af_list(afs: list[AbstractionFunction], header: dict | None = None) -> str:
    doc = {
        "header": dict(header or {}),
        "af_hash": af_list_hash(afs),
        "functions": [af.to_dict() for af in afs],
    }
    return json.dumps(doc, indent=2)


def load_af_list(text: str) -> tuple[list[AbstractionFunction], dict]:
    doc = json.loads(text)
    afs = [AbstractionFunction.from_dict(d) for d in doc["functions"]]
    if doc.get("af_hash") and doc["af_hash"] != af_list_hash(afs):
        raise ValueError("abstraction-function list hash mismatch")
    return afs, doc.get("header", {})
