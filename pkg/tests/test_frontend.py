import itertools

import pytest
from hypothesis import given, settings, strategies as st

from mixinterp import logic as L
from mixinterp.frontend import (
    LitClass, ParseError, SymClass, build_problem, classify_symbols, clausify_with_labels,
    parse_problem, problem_from_script,
)

HEADER = "(set-logic QF_UFLIA)\n(declare-fun x () Int)\n(declare-fun y () Int)\n(declare-fun z () Int)\n"


def parse_a(body: str, header: str = HEADER):
    return parse_problem(header + f"(assert (! {body} :named A))").formula("A")


def test_eq_chain_file_parses(eq_chain):
    assert eq_chain.sort == L.INT
    cls = eq_chain.partition.class_of
    assert cls["a"] is SymClass.A and cls["b"] is SymClass.B
    assert {s for s, c in cls.items() if c is SymClass.SHARED} >= {"q", "s1", "s2", "t", "f"}


def test_real_logic_and_decimals():
    text = "(set-logic QF_UFLRA)(declare-fun x () Real)(assert (! (< x 1.5) :named A))(assert (! (> x 2.0) :named B))"
    script = parse_problem(text)
    assert script.sort == L.REAL
    lit = script.formula("A").lit
    assert lit.atom.bound == L.EpsRational(L.Fraction(3, 2), -1)


@pytest.mark.parametrize("body, env, expected", [
    ("(<= (+ x y) 3)", {"x": 1, "y": 2}, True),
    ("(< (* 2 x) y)", {"x": 1, "y": 2}, False),
    ("(>= (- x) y)", {"x": -3, "y": 2}, True),
    ("(distinct x y z)", {"x": 1, "y": 2, "z": 1}, False),
    ("(=> (= x 1) (> y 0))", {"x": 1, "y": 0}, False),
    ("(let ((w (+ x 1))) (= w y))", {"x": 1, "y": 2}, True),
    ("(xor (= x 0) (= y 0))", {"x": 0, "y": 0}, False),
    ("(= (div x 2) y)", {"x": -3, "y": -2}, True),
])
def test_formula_semantics(body, env, expected):
    f = parse_a(body)
    m = L.Model({L.mk_var(k, L.INT): L.Fraction(v) for k, v in env.items()})
    assert L.evaluate(f, m) is expected


@pytest.mark.parametrize("text, line, col, fragment", [
    ("(set-logic QF_UFLIA)\n(assert (! (<= x 1) :named A))", 2, 16, "x"),
    ("(set-logic QF_BV)", 1, 1, "unsupported logic"),
    ("(declare-fun x () Int)", 1, 1, "missing set-logic"),
    ("(set-logic QF_UFLIA)\n(declare-fun x () Int)\n(assert (<= x 1))", 3, 1, "named"),
    ("(set-logic QF_UFLIA)\n(declare-fun x () Int)\n(assert (! (<= x 1) :named C))", 3, 28, "A or B"),
    ("(set-logic QF_UFLIA)\n(assert (! (<= 1 2) :named A)", 2, 1, ""),
])
def test_parse_errors_carry_positions(text, line, col, fragment):
    with pytest.raises(ParseError) as info:
        parse_problem(text)
    assert info.value.line == line
    assert info.value.col == col
    assert fragment in info.value.msg


def test_reserved_and_sort_errors():
    with pytest.raises(ParseError):
        parse_problem("(set-logic QF_UFLIA)(declare-fun @x () Int)")
    with pytest.raises(ParseError):
        parse_a("(= x (+ x true))")
    with pytest.raises(ParseError):
        parse_problem("(set-logic QF_UFLIA)(declare-fun x () Real)")
    with pytest.raises(ParseError, match="ite"):
        parse_a("(ite (> x 0) (= y 1) (= y 2))")


def test_declare_sort_and_functions():
    script = parse_problem("(set-logic QF_UFLIA)(declare-sort U 0)(declare-fun u () U)(declare-fun g (Int) U)"
                           "(declare-fun x () Int)(assert (! (= (g x) u) :named A))")
    atom = script.formula("A").lit.atom
    assert isinstance(atom, L.EqAtom) and atom.sort == "U"
    assert script.signature["g"] == ((L.INT,), "U")


def test_symbol_classification():
    a = parse_a("(and (<= x y) (= x 0))")
    b = parse_a("(<= y z)")
    part = classify_symbols(a, b)
    assert part.sym_class("x") is SymClass.A
    assert part.sym_class("y") is SymClass.SHARED
    assert part.sym_class("z") is SymClass.B
    mixed = parse_a("(<= x z)").lit
    assert part.lit_class(mixed) is LitClass.MIXED
    assert part.swapped().sym_class("x") is SymClass.B


def test_floor_divisions_share_variables_across_partitions():
    a = parse_a("(<= (div y 3) 1)")
    b = parse_a("(>= (div y 3) 2)")
    problem = build_problem(a, b, L.INT)
    assert len(problem.div_table) == 1
    (var,) = problem.div_table.values()
    assert problem.partition.sym_class(var.name) is SymClass.SHARED


bool_names = ["cp", "cq", "cr"]
atoms = st.sampled_from(bool_names).map(lambda n: L.bool_formula(L.mk_var(n, L.BOOL)))
formulas = st.recursive(
    atoms | atoms.map(L.mk_not),
    lambda inner: st.lists(inner, min_size=2, max_size=3).flatmap(
        lambda fs: st.sampled_from([L.mk_and(*fs), L.mk_or(*fs)])),
    max_leaves=8,
)


@settings(max_examples=80, deadline=None)
@given(f=formulas)
def test_clausification_is_equisatisfiable_per_assignment(f):
    clauses, labels = clausify_with_labels(f, "A", prefix="@T")
    vars_ = [L.mk_var(n, L.BOOL) for n in bool_names]
    for vals in itertools.product([False, True], repeat=3):
        base = dict(zip(vars_, vals))
        truth = L.evaluate(f, L.Model(dict(base)))
        extendable = False
        for lab_vals in itertools.product([False, True], repeat=len(labels)):
            m = L.Model({**base, **dict(zip(labels, lab_vals))})
            if all(any(L.eval_literal(l, m) for l in c) for c in clauses):
                extendable = True
                break
        assert truth == extendable


def test_clause_origins(parity):
    for c in parity.clauses_a:
        assert parity.origin_of(c) == {"A"}
    assert all("B" in parity.origin_of(c) for c in parity.clauses_b)


def test_problem_from_script_keeps_formulas(parity):
    again = problem_from_script(parse_problem((pytest.importorskip("conftest").DATA / "parity.smt2").read_text()))
    assert again.a == parity.a or L.formula_symbols(again.a) == L.formula_symbols(parity.a)
