"""Worked examples: emitted interpolants compared by bounded equivalence."""
import time

import pytest

from mixinterp import logic as L
from mixinterp import proof as P
from mixinterp.euf import CongStep, EqStep, Path
from mixinterp.frontend import parse_problem
from mixinterp.interpolation import ProjectionMode, annotate_proof, interpolate
from mixinterp.logic import LinTerm
from mixinterp.printer import formula_str
from mixinterp.sat import SolverConfig, Unsat, solve
from mixinterp.simplex import trichotomy_clause
from mixinterp.verification import OracleConfig, check_interpolant, decode_floor_div, equivalent_within

from conftest import DATA, load


def formula_over(data_file: str, text: str):
    """Parse ``text`` with the declarations of one of the data files."""
    decls = [ln for ln in (DATA / data_file).read_text().splitlines() if ln.startswith(("(set-logic", "(declare"))]
    script = parse_problem("\n".join(decls) + f"\n(assert (! {text} :named A))\n")
    return script.formula("A")


def _refute(problem):
    res = solve(problem, SolverConfig(extended_branches=True))
    assert isinstance(res, Unsat)
    assert P.check_proof(res.root, problem) == "ok"
    return res.root


EQ_CHAIN_EXPECTED = "(and (or (= (f s2) t) q) (or (= (f s1) t) (not q)))"
PARITY_EXPECTED = "(<= t (* 2 (div r 2)))"
# the intended reading: the guard compares the rounded-up half of t with the rounded-down half of s
COMBINED_EXPECTED = (
    "(and (<= (- (div (- t) 2)) (div s 2))"
    " (=> (>= (- (div (- t) 2)) (div s 2)) (= (f (- (div (- t) 2))) q)))"
)


@pytest.mark.parametrize("mode", list(ProjectionMode))
def test_eq_chain_interpolant(eq_chain, mode):
    start = time.perf_counter()
    interp = interpolate(eq_chain, _refute(eq_chain), mode).interpolant
    assert time.perf_counter() - start < 1.0
    expected = formula_over("eq_chain.smt2", EQ_CHAIN_EXPECTED)
    assert equivalent_within(interp, expected, OracleConfig(codomain=3)) is True


@pytest.mark.parametrize("mode", list(ProjectionMode))
def test_parity_interpolant(parity, mode):
    start = time.perf_counter()
    interp = interpolate(parity, _refute(parity), mode).interpolant
    assert time.perf_counter() - start < 1.0
    expected = formula_over("parity.smt2", PARITY_EXPECTED)
    assert equivalent_within(interp, expected, OracleConfig(bound=8)) is True


def test_parity_wrong_candidate_is_distinguished(parity):
    interp = interpolate(parity, _refute(parity)).interpolant
    assert equivalent_within(interp, formula_over("parity.smt2", "(<= t r)")) is False


@pytest.mark.parametrize("mode", list(ProjectionMode))
def test_combined_interpolant(combined, mode):
    interp = interpolate(combined, _refute(combined), mode).interpolant
    expected = formula_over("combined.smt2", COMBINED_EXPECTED)
    assert equivalent_within(interp, expected, OracleConfig(bound=8, codomain=3)) is True


@pytest.mark.parametrize("name", ["eq_chain.smt2", "parity.smt2", "combined.smt2"])
@pytest.mark.parametrize("mode", list(ProjectionMode))
def test_golden_interpolants_are_craig(name, mode):
    problem = load(name)
    interp = interpolate(problem, _refute(problem), mode).interpolant
    report = check_interpolant(problem.a, problem.b, interp, problem.partition, problem.sort,
                               oracle=OracleConfig(max_nodes=20_000))
    assert report.passed, report.lines()


# ---------------------------------------------------------------------------
# A hand-built refutation of the combined problem, resolved in a fixed order


def _lin(**coeffs):
    const = coeffs.pop("const", 0)
    return LinTerm({L.mk_var(n, L.INT): c for n, c in coeffs.items()}, const)


def _le(lhs, rhs):
    f = L.le(lhs, rhs, L.INT)
    assert isinstance(f, L.Lit)
    return f.lit


def scripted_combined_proof(problem):
    a, b = L.mk_var("a", L.INT), L.mk_var("b", L.INT)
    q = L.mk_var("q", "U")
    fa, fb = L.mk_app("f", [a], "U"), L.mk_app("f", [b], "U")
    a_eq_b = L.mk_eq(a, b).lit
    fa_q = L.mk_eq(fa, q).lit
    fb_q = L.mk_eq(fb, q).lit

    t_le_2a = _le(_lin(t=1), _lin(a=2))
    two_a_le_s = _le(_lin(a=2), _lin(s=1))
    s_le_2b = _le(_lin(s=1), _lin(b=2))
    two_b_le_t1 = _le(_lin(b=2), _lin(t=1, const=1))
    a_le_b = _le(_lin(a=1), _lin(b=1))
    b_le_a = _le(_lin(b=1), _lin(a=1))

    def unit(lit, origin):
        return P.input_leaf([lit], origin)

    tri = P.tc_leaf(trichotomy_clause(a, b), "trichotomy")
    la_ab = P.la_leaf([-two_a_le_s, -s_le_2b, a_le_b], {two_a_le_s: 1, s_le_2b: 1, -a_le_b: 2})
    la_ba = P.la_leaf([-t_le_2a, -two_b_le_t1, b_le_a], {t_le_2a: 1, two_b_le_t1: 1, -b_le_a: 2})
    path = Path(fb, q, (
        CongStep(fb, fa, (Path(b, a, (EqStep(a_eq_b, b, a),)),)),
        EqStep(fa_q, fa, q),
    ))
    euf = P.euf_leaf([fb_q, -fa_q, -a_eq_b], path)

    unit_ab = P.resolve(P.resolve(la_ab, unit(two_a_le_s, "A"), -two_a_le_s), unit(s_le_2b, "B"), -s_le_2b)
    unit_ba = P.resolve(P.resolve(la_ba, unit(t_le_2a, "A"), -t_le_2a), unit(two_b_le_t1, "B"), -two_b_le_t1)
    not_eq = P.resolve(P.resolve(euf, unit(-fb_q, "B"), fb_q), unit(fa_q, "A"), -fa_q)
    two_sided = P.resolve(tri, not_eq, a_eq_b)
    one_sided = P.resolve(unit_ba, two_sided, b_le_a)
    root = P.resolve(unit_ab, one_sided, a_le_b)
    return root


def test_scripted_proof_is_valid(combined):
    root = scripted_combined_proof(combined)
    assert P.check_proof(root, combined) == "ok"


def test_scripted_proof_k3_values(combined):
    root = scripted_combined_proof(combined)
    result = interpolate(combined, root, ProjectionMode.PUDLAK)
    assert [entry[-1] for entry in result.trace] == [1, 4]
    expected = formula_over("combined.smt2", COMBINED_EXPECTED)
    assert equivalent_within(result.interpolant, expected, OracleConfig(bound=8, codomain=3)) is True


def test_scripted_proof_trace_operands(combined):
    trace = interpolate(combined, scripted_combined_proof(combined)).trace
    (c1, k1, c2, k2, k3), (d1, l1, d2, l2, l3) = trace
    assert sorted([c1, c2]) == [1, 2] and sorted([k1, k2]) == [-1, 0] and k3 == 1
    assert (d1, d2) == (2, 2) and sorted([l1, l2]) == [-1, 1] and l3 == 4


def test_solver_proof_k3_values(combined):
    trace = interpolate(combined, _refute(combined)).trace
    assert [entry[-1] for entry in trace] == [1, 4]


def test_scripted_proof_partial_interpolants(combined):
    root = scripted_combined_proof(combined)
    patterns = annotate_proof(root, ProjectionMode.PUDLAK, combined.partition)
    # the unit a<=b comes from an A/B lemma pair and keeps an LA node
    assert isinstance(patterns[root.left.id], L.LA)
    assert isinstance(patterns[root.right.id], L.LA)


def test_expected_strings_print_back():
    f = decode_floor_div(formula_over("parity.smt2", PARITY_EXPECTED), {})
    assert "div r 2" in formula_str(f)
