"""Ternary evaluation of abstraction functions against concrete states.

A concrete state is a small heap snapshot: an object table plus, per class,
an optional designated root instance (the monitored object).  Evaluating a
clause walks a state-variable path from the root; any unresolvable step (a
missing root, a null reference, a missing array element) makes the clause
*unknown* (U).  Unknown dominates the conjunction: a single U clause makes
the whole function U even if another clause is already false.  This is
deliberately not Kleene conjunction; it reflects that an abstract state is
only trustworthy when every probe it aggregates was actually observable.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .functions import (AbstractionFunction, BoolTerm, Clause, FieldTerm,
                        IntTerm, NullTerm, ParamTerm, Term, af_list_hash)


class Ternary(enum.Enum):
    T = "T"
    F = "F"
    U = "U"

    def __str__(self) -> str:
        return self.value

    def negate(self) -> "Ternary":
        if self is Ternary.T:
            return Ternary.F
        if self is Ternary.F:
            return Ternary.T
        return Ternary.U


class StateError(ValueError):
    """Malformed concrete state (dangling object id, bad shape)."""


@dataclass(frozen=True)
class ConcreteObject:
    class_name: str
    fields: dict

    def to_dict(self) -> dict:
        return {"class": self.class_name, "fields": dict(self.fields)}


@dataclass(frozen=True)
class ConcreteState:
    """Heap snapshot: object table + designated per-class roots.

    Field values are ints, bools, ``None`` (null ref), object-id strings,
    or lists of object ids / ``None`` entries (arrays of refs).
    """

    objects: dict = field(default_factory=dict)  # id -> ConcreteObject
    roots: dict = field(default_factory=dict)    # class name -> object id | None

    def validate(self) -> None:
        for oid, obj in self.objects.items():
            for fname, value in obj.fields.items():
                self._check_value(value, f"{oid}.{fname}")
        for cls, oid in self.roots.items():
            if oid is not None and oid not in self.objects:
                raise StateError(f"root of {cls!r} is dangling object id {oid!r}")

    def _check_value(self, value, where: str) -> None:
        if isinstance(value, str):
            if value not in self.objects:
                raise StateError(f"dangling object id {value!r} at {where}")
        elif isinstance(value, list):
            for i, v in enumerate(value):
                if v is not None:
                    self._check_value(v, f"{where}[{i}]")

    def to_dict(self) -> dict:
        return {
            "roots": dict(self.roots),
            "objects": {oid: obj.to_dict() for oid, obj in self.objects.items()},
        }

    @staticmethod
    def from_dict(d: dict) -> "ConcreteState":
        objects = {
            oid: ConcreteObject(spec["class"], dict(spec.get("fields", {})))
            for oid, spec in d.get("objects", {}).items()
        }
        state = ConcreteState(objects, dict(d.get("roots", {})))
        state.validate()
        return state


_UNRESOLVED = object()


def _resolve(term: Term, state: ConcreteState):
    """Resolve a term to a python value, or ``_UNRESOLVED``."""
    if isinstance(term, IntTerm):
        return term.value
    if isinstance(term, BoolTerm):
        return term.value
    if isinstance(term, NullTerm):
        return None
    if isinstance(term, ParamTerm):
        return _UNRESOLVED  # parameters are not part of a program state
    assert isinstance(term, FieldTerm)
    root_id = state.roots.get(term.root)
    if root_id is None or root_id not in state.objects:
        return _UNRESOLVED
    value: object = root_id
    for kind, payload in term.segments:
        if kind == "field":
            if not isinstance(value, str) or value not in state.objects:
                return _UNRESOLVED
            fields = state.objects[value].fields
            if payload not in fields:
                return _UNRESOLVED
            value = fields[payload]
        elif kind == "length":
            if not isinstance(value, list):
                return _UNRESOLVED
            value = len(value)
        else:  # index
            if not isinstance(value, list):
                return _UNRESOLVED
            idx = payload
            if isinstance(idx, FieldTerm):
                idx = _resolve(idx, state)
                if idx is _UNRESOLVED or not isinstance(idx, int):
                    return _UNRESOLVED
            if not isinstance(idx, int) or idx < 0 or idx >= len(value):
                return _UNRESOLVED
            value = value[idx]
    return value


def eval_clause(clause: Clause, state: ConcreteState) -> Ternary:
    """Total ternary evaluation of one comparison."""
    c = clause.normalized()
    left = _resolve(c.lhs, state)
    right = _resolve(c.rhs, state)
    if left is _UNRESOLVED or right is _UNRESOLVED:
        return Ternary.U
    result = _compare(left, c.op, right)
    if result is None:
        return Ternary.U
    return Ternary.T if result else Ternary.F


def _compare(left, op: str, right) -> "bool | None":
    # refs / null: only equality makes sense
    left_ref = left is None or isinstance(left, (str, list))
    right_ref = right is None or isinstance(right, (str, list))
    if left_ref or right_ref:
        if op == "==":
            return left == right
        if op == "!=":
            return left != right
        return None
    if isinstance(left, bool) != isinstance(right, bool):
        return None  # int/bool type mismatch is unresolvable, not false
    if op == "==":
        return left == right
    if op == "!=":
        return left != right
    if isinstance(left, bool):
        return None
    return {"<": left < right, "<=": left <= right,
            ">": left > right, ">=": left >= right}[op]


def eval_function(af: AbstractionFunction, state: ConcreteState) -> Ternary:
    """Unknown dominates, then false, then true."""
    saw_false = False
    for clause in af.clauses:
        v = eval_clause(clause, state)
        if v is Ternary.U:
            return Ternary.U
        if v is Ternary.F:
            saw_false = True
    return Ternary.F if saw_false else Ternary.T


@dataclass(frozen=True)
class AbstractState:
    """Vector of ternary values, index-aligned with an AF list."""

    values: tuple[Ternary, ...]
    af_hash: str

    def __str__(self) -> str:
        return "".join(v.value for v in self.values)

    def __len__(self) -> int:
        return len(self.values)

    @staticmethod
    def from_string(text: str, af_hash: str) -> "AbstractState":
        return AbstractState(tuple(Ternary(ch) for ch in text), af_hash)


def abstract_state(afs: list[AbstractionFunction], state: ConcreteState,
                   ) -> AbstractState:
    if not afs:
        raise ValueError("abstract_state needs a non-empty AF list")
    values = tuple(eval_function(af, state) for af in afs)
    return AbstractState(values, af_list_hash(afs))
