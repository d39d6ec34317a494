import pytest
from hypothesis import given, settings, strategies as st

from mixinterp import logic as L
from mixinterp import proof as P
from mixinterp.euf import EqStep, Path, PathError, check_path, closure, euf_check, euf_propagate
from mixinterp.verification import OracleConfig, OracleSat, OracleUnsat, bounded_oracle

V = "V"
A, B, C, D = (L.mk_var(n, V) for n in ("ea", "eb", "ec", "ed"))


def f(t):
    return L.mk_app("ef", [t], V)


def g(t, u):
    return L.mk_app("eg", [t, u], V)


def eq(t, u, pol=True):
    lit = L.mk_eq(t, u).lit
    return lit if pol else -lit


def test_congruence_conflict_and_path():
    asserted = [eq(A, B), eq(f(A), C), eq(f(B), C, False)]
    clause, path = euf_check(asserted)
    assert set(-l for l in clause if not l.pol) == {eq(A, B), eq(f(A), C)}
    check_path(path, {eq(A, B), eq(f(A), C)})
    assert P.check_node(P.euf_leaf(clause, path)) is None


def test_binary_congruence_needs_both_arguments():
    asserted = [eq(A, B), eq(g(A, C), D), eq(g(B, C), D, False)]
    assert euf_check(asserted) is not None
    assert euf_check([eq(A, B), eq(g(A, C), D), eq(g(B, A), D, False)]) is None


def test_consistent_set_has_no_conflict():
    assert euf_check([eq(A, B), eq(C, D), eq(A, C, False)]) is None


def test_broken_path_rejected():
    bad = Path(A, C, (EqStep(eq(A, B), A, B),))
    with pytest.raises(PathError):
        check_path(bad)


def test_path_reversal_is_a_path():
    cc = closure([eq(A, B), eq(B, C), eq(f(A), D)], [f(C)])
    p = cc.explain(f(C), D)
    check_path(p)
    check_path(p.reversed())


def test_propagation_reports_implied_equalities():
    x, y = L.mk_var("ex", L.INT), L.mk_var("ey", L.INT)
    fx, fy = L.mk_app("eh", [x], L.INT), L.mk_app("eh", [y], L.INT)
    found = euf_propagate([eq(x, y)], [fx, fy])
    assert [(t, u) for t, u, _ in found] == [(fx, fy)]


terms = [A, B, C, f(A), f(B), f(f(A))]
lit_strategy = st.tuples(st.sampled_from(terms), st.sampled_from(terms), st.booleans()).filter(
    lambda x: x[0] is not x[1]).map(lambda x: eq(*x))


@settings(max_examples=60, deadline=None)
@given(lits=st.lists(lit_strategy, min_size=1, max_size=5))
def test_euf_check_agrees_with_enumeration(lits):
    res = euf_check(lits)
    verdict = bounded_oracle(L.mk_and(*(L.Lit(l) for l in lits)), OracleConfig(codomain=4))
    if res is None:
        assert isinstance(verdict, OracleSat)
    else:
        clause, path = res
        assert isinstance(verdict, OracleUnsat)
        assert all(-l in lits for l in clause if not l.pol)
        assert P.check_node(P.euf_leaf(clause, path)) is None
