from fractions import Fraction

from hypothesis import given, settings, strategies as st

from mixinterp import logic as L
from mixinterp.frontend import parse_problem
from mixinterp.printer import formula_str, model_str, num_str, symbol_str

HEADER = ("(set-logic QF_UFLIA)(declare-fun x () Int)(declare-fun y () Int)"
          "(declare-fun h (Int) Int)(declare-fun p () Bool)")


def reparse(text: str):
    return parse_problem(HEADER + f"(assert (! {text} :named A))").formula("A")


def test_numbers():
    assert num_str(-3, L.INT) == "(- 3)"
    assert num_str(Fraction(1, 2), L.REAL) == "(/ 1.0 2.0)"
    assert num_str(4, L.REAL) == "4.0"


def test_symbols_get_quoted_when_needed():
    assert symbol_str("abc") == "abc"
    assert symbol_str("a b") == "|a b|"


lit_texts = st.sampled_from([
    "(<= (+ x (* (- 2) y)) 3)", "(< x y)", "(= (h x) y)", "p", "(= (div x 3) y)", "(>= (h (+ x 1)) 0)",
])
nested = st.recursive(
    lit_texts | lit_texts.map(lambda s: f"(not {s})"),
    lambda inner: st.lists(inner, min_size=2, max_size=3).flatmap(
        lambda xs: st.sampled_from(["and", "or"]).map(lambda op: f"({op} {' '.join(xs)})")),
    max_leaves=6,
)


@settings(max_examples=60, deadline=None)
@given(text=nested, vx=st.integers(-4, 4), vy=st.integers(-4, 4), vp=st.booleans())
def test_print_parse_round_trip(text, vx, vy, vp):
    f = reparse(text)
    g = reparse(formula_str(f))
    x, y, p = L.mk_var("x", L.INT), L.mk_var("y", L.INT), L.mk_var("p", L.BOOL)
    table = {(Fraction(v),): Fraction(v * v - 2) for v in range(-6, 7)}
    m = L.Model({x: Fraction(vx), y: Fraction(vy), p: vp}, {"h": table})
    assert L.evaluate(f, m) == L.evaluate(g, m)


def test_model_output_hides_internal_symbols():
    m = L.Model({L.mk_var("x", L.INT): Fraction(2), L.mk_var("@L0", L.BOOL): True},
                {"h": {(Fraction(0),): Fraction(1)}}, {"h": ((L.INT,), L.INT)})
    text = model_str(m)
    assert "@L0" not in text
    assert "(define-fun x () Int 2)" in text
    assert "(define-fun h ((x!0 Int)) Int 1)" in text
    assert text.endswith(")\n")
