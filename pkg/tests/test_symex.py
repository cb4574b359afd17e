import pytest

from burstmine.functions import Clause, IntTerm, ParamTerm, parse_term
from burstmine.ir import parse_program
from burstmine.symex import (SymexBounds, extract_abstraction_functions,
                             strip_parameter_clauses, symbolic_execute)
from burstmine.functions import PathCondition

from conftest import cart_source

# Frozen 14-row reference table for the shopping-cart subject, as clause
# sets (clause order within a function is presentation detail).
CART_TABLE = {
    "addItem": [
        {"Cart.nProducts != 0", "Cart.products.length >= 0"},
        {"Cart.nProducts == 0", "Cart.CART_SIZE >= 0",
         "Cart.nProducts < Cart.CART_SIZE"},
        {"Cart.nProducts == 0", "Cart.CART_SIZE >= 0",
         "Cart.nProducts >= Cart.CART_SIZE"},
        {"Cart.nProducts == 0", "Cart.products.length == 0"},
    ],
    "applyDiscount": [
        {"Cart.nProducts > 0", "Cart.products.length > 0"},
        {"Cart.nProducts > 0", "Cart.products.length == 0"},
        {"Cart.nProducts > 0", "Cart.products.length > 0",
         "Cart.products.[0].value >= Cart.PRICE"},
        {"Cart.nProducts > 0", "Cart.products.length > 0",
         "Cart.products.[0].value < Cart.PRICE"},
    ],
    "calculateTotal": [
        {"Cart.products.length > 0", "Cart.products.[0].taxFree == true"},
        {"Cart.products.length > 0", "Cart.products.[0].taxFree == false"},
        {"Cart.products.length > 0"},
        {"Cart.products.length == 0"},
    ],
    "emptyCart": [
        {"Cart.nProducts <= 0"},
        {"Cart.nProducts > 0", "Cart.CART_SIZE >= 0"},
    ],
}


@pytest.fixture(scope="module")
def cart_program():
    return parse_program(cart_source())


@pytest.fixture(scope="module")
def cart_afs(cart_program):
    afs, report = extract_abstraction_functions(
        cart_program, ("Cart", "Product"))
    return afs, report


def method(program, name):
    return next(m for m in program.classes[0].methods if m.name == name)


def test_cart_extraction_matches_reference_table(cart_afs):
    afs, _ = cart_afs
    got = {frozenset(af.clause_set()) for af in afs}
    want = {frozenset(s) for rows in CART_TABLE.values() for s in rows}
    assert got == want
    assert len(afs) == 14


def test_cart_extraction_per_method_attribution(cart_afs):
    afs, _ = cart_afs
    for mname, rows in CART_TABLE.items():
        mine = [set(af.clause_set()) for af in afs if af.method_name == mname]
        assert len(mine) == len(rows)
        for row in rows:
            assert row in mine


def test_empty_cart_includes_loop_not_entered_condition(cart_program):
    paths, _ = symbolic_execute(method(cart_program, "emptyCart"), cart_program)
    assert {"Cart.nProducts <= 0"} in [
        {c.key() for c in p.clauses} for p in paths]


def test_calculate_total_includes_empty_array_condition(cart_program):
    paths, _ = symbolic_execute(method(cart_program, "calculateTotal"), cart_program)
    assert {"Cart.products.length == 0"} in [
        {c.key() for c in p.clauses} for p in paths]


def test_empty_body_yields_single_trivial_path():
    p = parse_program("class A { field x: int; method noop() { } }")
    paths, report = symbolic_execute(p.classes[0].methods[0], p)
    assert len(paths) == 1
    assert paths[0].clauses == ()
    assert not report.truncated
    assert strip_parameter_clauses(paths[0]) is None


def test_loop_truncation_flagged(cart_program):
    _, report = symbolic_execute(method(cart_program, "calculateTotal"), cart_program)
    assert report.truncated


def test_determinism(cart_program):
    a, _ = extract_abstraction_functions(cart_program, ("Cart", "Product"))
    b, _ = extract_abstraction_functions(cart_program, ("Cart", "Product"))
    assert [af.id for af in a] == [af.id for af in b]
    assert [af.clause_keys() for af in a] == [af.clause_keys() for af in b]


def test_extracted_functions_are_parameter_free(cart_afs):
    afs, _ = cart_afs
    for af in afs:
        for c in af.clauses:
            assert not c.mentions_parameter()


# --- strip_parameter_clauses -------------------------------------------------

def test_strip_drops_parameter_clauses():
    pc = PathCondition(
        (Clause(ParamTerm("p"), "!=", parse_term("null")),
         Clause(parse_term("Cart.nProducts"), "==", IntTerm(0))),
        ("Cart", "addItem", "P0"))
    af = strip_parameter_clauses(pc)
    assert af is not None
    assert af.clause_keys() == ("Cart.nProducts == 0",)
    # brute-force oracle: every dropped clause mentions the parameter name
    dropped = [c for c in pc.clauses if c.key() not in af.clause_keys()]
    assert dropped and all("p" in str(c.lhs) or "p" in str(c.rhs) for c in dropped)


def test_strip_all_parameters_yields_none():
    pc = PathCondition(
        (Clause(ParamTerm("p"), "!=", parse_term("null")),
         Clause(ParamTerm("p", ("value",)), ">", IntTerm(0))),
        ("Cart", "addItem", "P0"))
    assert strip_parameter_clauses(pc) is None


def test_strip_identity_when_parameter_free():
    pc = PathCondition(
        (Clause(parse_term("Cart.nProducts"), ">", IntTerm(0)),),
        ("Cart", "m", "P0"))
    af = strip_parameter_clauses(pc)
    assert af is not None and af.clause_keys() == ("Cart.nProducts > 0",)


def test_parameter_guards_are_explored_then_stripped():
    src = """
    class Box { field n: int;
      method put(v: int) {
        if (v > 0 && Box.n == 0) { Box.n = v; }
      }
    }
    """
    p = parse_program(src)
    paths, _ = symbolic_execute(p.classes[0].methods[0], p)
    keys = [tuple(c.key() for c in path.clauses) for path in paths]
    assert ("v > 0", "Box.n == 0") in keys  # raw condition keeps the input clause
    afs, _ = extract_abstraction_functions(p, ("Box",))
    assert [set(af.clause_set()) for af in afs] == [
        {"Box.n == 0"}, {"Box.n != 0"}]


# --- dedup and bounds ---------------------------------------------------------

def test_twin_methods_deduplicate():
    src = """
    class A { field x: int;
      method one() { if (A.x > 0) { A.x = 0; } }
      method two() { if (A.x > 0) { A.x = 1; } }
    }
    """
    p = parse_program(src)
    afs, _ = extract_abstraction_functions(p, ("A",))
    keys = [af.clause_keys() for af in afs]
    assert len(keys) == len(set(keys))
    assert {set(af.clause_set()) == {"A.x > 0"} for af in afs}
    # both polarities appear once each, attributed to the first method
    assert all(af.method_name == "one" for af in afs)


def test_branch_budget_truncates_paths():
    guards = " ".join(
        f"if (A.x > {i}) {{ A.x = {i}; }}" for i in range(8))
    p = parse_program(f"class A {{ field x: int; method m() {{ {guards} }} }}")
    bounds = SymexBounds(max_branches_per_path=3, max_states=10_000)
    paths, report = symbolic_execute(p.classes[0].methods[0], p, bounds)
    assert report.truncated
    assert all(len(path.clauses) <= 3 for path in paths)
    assert any(path.truncated for path in paths)


def test_path_count_within_exponential_bound():
    guards = " ".join(f"if (A.x > {i}) {{ A.x = {i}; }}" for i in range(5))
    p = parse_program(f"class A {{ field x: int; method m() {{ {guards} }} }}")
    bounds = SymexBounds(max_branches_per_path=10, max_states=100_000)
    paths, report = symbolic_execute(p.classes[0].methods[0], p, bounds)
    assert len(paths) == 2 ** 5
    assert report.states_visited <= bounds.max_states


def test_states_budget_truncates():
    guards = " ".join(f"if (A.x > {i}) {{ A.x = {i}; }}" for i in range(12))
    p = parse_program(f"class A {{ field x: int; method m() {{ {guards} }} }}")
    bounds = SymexBounds(max_branches_per_path=20, max_states=50)
    paths, report = symbolic_execute(p.classes[0].methods[0], p, bounds)
    assert report.truncated
    assert report.states_visited <= bounds.max_states + 1


def test_bounds_must_be_positive():
    with pytest.raises(ValueError):
        SymexBounds(max_branches_per_path=0)


def test_inlined_call_depth_one():
    src = """
    class A { field x: int;
      method outer(v: int) { call inner(v); }
      method inner(w: int) { if (A.x > 0 && w > 0) { A.x = 0; } }
    }
    """
    p = parse_program(src)
    afs, _ = extract_abstraction_functions(p, ("A",))
    sets = [set(af.clause_set()) for af in afs]
    assert {"A.x > 0"} in sets  # inlined guard observed through the call


def test_nested_call_havocs():
    src = """
    class A { field x: int;
      method a() { call b(); }
      method b() { call c(); }
      method c() { if (A.x > 0) { A.x = 0; } }
    }
    """
    p = parse_program(src)
    m = p.classes[0].methods[0]
    paths, report = symbolic_execute(m, p)
    assert report.havocked_calls == 1
    assert [path.clauses for path in paths] == [()]
