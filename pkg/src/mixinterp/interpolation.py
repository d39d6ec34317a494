"""Partial interpolants over resolution proofs with mixed literals."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import logic as L
from . import proof as P
from .euf import CongStep, EqStep, Path
from .frontend import LitClass, SymClass
from .logic import EQ, LA, EpsRational, Formula, LinTerm, Literal, Term


class ProjectionMode(enum.Enum):
    PUDLAK = "pudlak"
    MCMILLAN = "mcmillan"


class ShapeError(Exception):
    """A partial interpolant does not have the shape a rule requires."""


class AuxRegistry:
    """Fresh shared variables purifying mixed literals."""

    def __init__(self, partition):
        self.partition = partition
        self.eq_aux: dict = {}
        self.ineq_aux: dict = {}
        self.names: set = set()
        self._n = 0

    def _fresh(self, stem: str, sort: str) -> Term:
        name = f"@{stem}{self._n}"
        self._n += 1
        self.partition.add_aux(name)
        self.names.add(name)
        return L.mk_var(name, sort)

    def eq(self, atom: L.EqAtom) -> tuple[Term, Term]:
        pair = self.eq_aux.get(atom)
        if pair is None:
            pair = (self._fresh("e", atom.sort), self._fresh("p", L.BOOL))
            self.eq_aux[atom] = pair
        return pair

    def ineq(self, lit: Literal) -> Term:
        x = self.ineq_aux.get(lit)
        if x is None:
            x = self._fresh("x", lit.atom.sort)
            self.ineq_aux[lit] = x
        return x

    def is_aux(self, t: Term) -> bool:
        return t.kind == "var" and t.name in self.names


# ---------------------------------------------------------------------------
# Projection


def _a_local(t: Term, partition) -> bool:
    return partition.term_class(t) is LitClass.A


def split_ineq(lit: Literal, partition):
    """(A-local part, remaining part, bound) of the materialized inequality."""
    lhs, bound = L.materialize(lit)
    a = [(t, c) for t, c in lhs.coeffs if _a_local(t, partition)]
    b = [(t, c) for t, c in lhs.coeffs if not _a_local(t, partition)]
    return LinTerm(tuple(a)), LinTerm(tuple(b)), bound


def eq_sides(atom: L.EqAtom, partition) -> tuple[Term, Term]:
    """(A-side term, B-side term) of a mixed equality."""
    if partition.term_class(atom.lhs) is LitClass.A:
        return atom.lhs, atom.rhs
    return atom.rhs, atom.lhs


def _owned_by_a(cls: LitClass, mode: ProjectionMode) -> tuple[bool, bool]:
    """(in A-projection, in B-projection) of a non-mixed literal."""
    if cls is LitClass.A:
        return True, False
    if cls is LitClass.B:
        return False, True
    return (mode is ProjectionMode.PUDLAK), True


def project(lit: Literal, side: str, mode: ProjectionMode, reg: AuxRegistry, partition) -> Formula:
    cls = partition.lit_class(lit)
    if cls is not LitClass.MIXED:
        in_a, in_b = _owned_by_a(cls, mode)
        keep = in_a if side == "A" else in_b
        return L.Lit(lit) if keep else L.TRUE
    atom = lit.atom
    if isinstance(atom, L.EqAtom):
        x, p = reg.eq(atom)
        ta, tb = eq_sides(atom, partition)
        pv = L.bool_formula(p)
        if side == "A":
            eq = L.mk_eq(ta, x)
            return eq if lit.pol else L.mk_xor(pv, eq)
        eq = L.mk_eq(x, tb)
        return eq if lit.pol else L.mk_xor(L.mk_not(pv), eq)
    if isinstance(atom, L.LAAtom):
        x = LinTerm.of_term(reg.ineq(lit))
        a, b, bound = split_ineq(lit, partition)
        if side == "A":
            return L.le(a + x, LinTerm(), atom.sort)
        return L.le(b - x, LinTerm.const_of(bound.real), atom.sort, strict=bound.eps < 0)
    raise ShapeError(f"mixed Boolean literal {lit!r}")


def _negated_conj(clause, side, mode, reg, partition) -> Formula:
    return L.mk_and(*(project(-l, side, mode, reg, partition) for l in clause))


# ---------------------------------------------------------------------------
# Leaves


def interp_input_leaf(clause, origin: str, mode: ProjectionMode, partition) -> Formula:
    """A: negation of the part of the negated clause outside A; B: that part for B."""
    lits = []
    for l in clause:
        in_a, in_b = _owned_by_a(partition.lit_class(l), mode)
        if origin == "A" and not in_a:
            lits.append(l)
        elif origin == "B" and not in_b:
            lits.append(-l)
    if origin == "A":
        return L.mk_or(*(L.Lit(l) for l in lits))
    return L.mk_and(*(L.Lit(l) for l in lits))


def _int_or_eps(sort: str) -> EpsRational:
    return EpsRational(Fraction(-1)) if sort == L.INT else L.NEG_EPS


def interp_la_leaf(clause, farkas, reg: AuxRegistry, mode: ProjectionMode, partition) -> Formula:
    items = farkas.items() if isinstance(farkas, dict) else farkas
    total = LinTerm()
    strict = False
    has_aux = False
    sort = L.INT
    for lit, k in items:
        sort = lit.atom.sort
        cls = partition.lit_class(lit)
        if cls is LitClass.MIXED:
            a, _, _ = split_ineq(lit, partition)
            total = total + (a + LinTerm.of_term(reg.ineq(lit))).scale(k)
            has_aux = True
        elif _owned_by_a(cls, mode)[0] and not (cls is LitClass.SHARED and mode is ProjectionMode.MCMILLAN):
            lhs, bound = L.materialize(lit)
            total = total + lhs.add_const(-bound.real).scale(k)
            strict = strict or bound.eps < 0
    f = L.le(total, LinTerm(), sort, strict=strict)
    if not has_aux:
        return f
    k = L.ZERO if strict else _int_or_eps(sort)
    return L.mk_la(total, k, f, sort)


# -- EUF ---------------------------------------------------------------------


@dataclass
class _Step:
    left: Term
    right: Term
    owner: str  # "A" or "B"
    args: tuple | None = None  # per argument: list of _Step


def _side_of_term(t: Term, partition) -> str | None:
    c = partition.term_class(t)
    if c is LitClass.MIXED:
        raise ShapeError(f"mixed term {t!r} on a congruence path")
    return {LitClass.A: "A", LitClass.B: "B"}.get(c)


def _norm_path(path: Path, reg: AuxRegistry, partition) -> list:
    out: list = []
    for st in path.steps:
        if isinstance(st, EqStep):
            cls = partition.lit_class(st.lit)
            if cls is LitClass.MIXED:
                x, _ = reg.eq(st.lit.atom)
                first = "A" if _side_of_term(st.left, partition) == "A" else "B"
                second = "B" if first == "A" else "A"
                out.append(_Step(st.left, x, first))
                out.append(_Step(x, st.right, second))
            else:
                out.append(_Step(st.left, st.right, "A" if cls is LitClass.A else "B"))
            continue
        args = [_norm_path(p, reg, partition) for p in st.args]
        ls, rs = _side_of_term(st.left, partition), _side_of_term(st.right, partition)
        if {ls, rs} == {"A", "B"}:
            out.extend(_split_congruence(st, args, ls))
        elif "A" in (ls, rs):
            out.append(_Step(st.left, st.right, "A", tuple(args)))
        elif "B" in (ls, rs):
            out.append(_Step(st.left, st.right, "B", tuple(args)))
        else:
            pure_a = any(args) and all(s.owner == "A" for a in args for s in a)
            out.append(_Step(st.left, st.right, "A" if pure_a else "B", tuple(args)))
    return out


def _split_congruence(st: CongStep, args: list, first: str) -> list:
    """Split f(u..)=f(v..) between an A-term and a B-term at a shared f(w..)."""
    pre, post, mids = [], [], []
    for i, steps in enumerate(args):
        if first == "A":
            n = 0
            while n < len(steps) and steps[n].owner == "A":
                n += 1
            mids.append(steps[n - 1].right if n else st.left.args[i])
        else:
            n = len(steps)
            while n > 0 and steps[n - 1].owner == "A":
                n -= 1
            mids.append(steps[n].left if n < len(steps) else st.right.args[i])
        pre.append(steps[:n])
        post.append(steps[n:])
    mid = L.mk_app(st.left.name, mids, st.left.sort)
    second = "B" if first == "A" else "A"
    out = []
    if mid is not st.left:
        out.append(_Step(st.left, mid, first, tuple(pre)))
    if mid is not st.right:
        out.append(_Step(mid, st.right, second, tuple(post)))
    return out


def _runs(steps: list):
    run: list = []
    for s in steps:
        if run and run[-1].owner != s.owner:
            yield run
            run = []
        run.append(s)
    if run:
        yield run


def _walk_primal(steps, summ: str, conj: list):
    """Summaries of the summarizing side's runs, with premises they rely on."""
    for run in _runs(steps):
        if run[0].owner == summ:
            prem: list = []
            for s in run:
                for a in s.args or ():
                    _walk_dual(a, summ, prem, conj)
            eq = L.mk_eq(run[0].left, run[-1].right)
            if eq != L.TRUE:
                conj.append(L.mk_or(*(L.mk_not(p) for p in prem), eq))
        else:
            for s in run:
                for a in s.args or ():
                    _walk_primal(a, summ, conj)


def _walk_dual(steps, summ: str, prem: list, conj: list):
    for run in _runs(steps):
        if run[0].owner != summ:
            eq = L.mk_eq(run[0].left, run[-1].right)
            if eq != L.TRUE:
                prem.append(eq)
            for s in run:
                for a in s.args or ():
                    _walk_primal(a, summ, conj)
        else:
            for s in run:
                for a in s.args or ():
                    _walk_dual(a, summ, prem, conj)


def interp_euf_leaf(clause, path: Path, reg: AuxRegistry, mode: ProjectionMode, partition) -> Formula:
    pos = [l for l in clause if l.pol and isinstance(l.atom, L.EqAtom)]
    if len(pos) != 1:
        raise ShapeError("EUF lemma needs exactly one positive equality")
    atom = pos[0].atom
    if {path.start, path.end} != {atom.lhs, atom.rhs}:
        raise ShapeError("path does not match the lemma's equality")
    cls = partition.lit_class(atom)
    if cls is LitClass.MIXED:
        ta, _ = eq_sides(atom, partition)
        if path.start is not ta:
            path = path.reversed()
        steps = _norm_path(path, reg, partition)
        x, p = reg.eq(atom)
        n = 0
        while n < len(steps) and steps[n].owner == "A":
            n += 1
        prem: list = []
        conj: list = []
        for s in steps[:n]:
            for a in s.args or ():
                _walk_dual(a, "A", prem, conj)
        end = steps[n - 1].right if n else ta
        _walk_primal(steps[n:], "A", conj)
        head = L.mk_or(*(L.mk_not(q) for q in prem), EQ(x, p, end))
        return L.mk_and(head, *conj)
    steps = _norm_path(path, reg, partition)
    conj = []
    if cls is LitClass.A:
        _walk_primal(steps, "B", conj)
        return L.mk_not(L.mk_and(*conj))
    _walk_primal(steps, "A", conj)
    return L.mk_and(*conj)


# -- theory combination ------------------------------------------------------


def interp_tc_leaf(clause, shape: str, reg: AuxRegistry, mode: ProjectionMode, partition) -> Formula:
    eqs = [l for l in clause if isinstance(l.atom, L.EqAtom)]
    if len(eqs) != 1:
        raise ShapeError("TC clause needs exactly one equality")
    eq = eqs[0]
    atom = eq.atom
    cls = partition.lit_class(atom)
    if cls is not LitClass.MIXED:
        if cls is LitClass.B or any(partition.lit_class(l) is LitClass.B for l in clause):
            return interp_input_leaf(clause, "B", mode, partition)
        return interp_input_leaf(clause, "A", mode, partition)
    sort = atom.sort
    ta, _ = eq_sides(atom, partition)
    a_lin = LinTerm(tuple((t, c) for t, c in LinTerm.of_term(ta).coeffs if _a_local(t, partition)))
    s_a = LinTerm.of_term(ta) - a_lin
    lowers, uppers = [], []
    for l in clause:
        if l is eq:
            continue
        neg = -l
        a, _, _ = split_ineq(neg, partition)
        lead_t, lead_c = a_lin.coeffs[0]
        alpha = a.coeff(lead_t) / lead_c
        if a != a_lin.scale(alpha) or alpha == 0:
            raise ShapeError(f"literal {l!r} is not over the equality's difference")
        y = LinTerm.of_term(reg.ineq(neg)).scale(1 / abs(alpha))
        (lowers if alpha < 0 else uppers).append(y)
    x, p = reg.eq(atom)
    xl = LinTerm.of_term(x)
    eps = _int_or_eps(sort)
    if shape == "trichotomy" and eq.pol and len(lowers) == 1 and len(uppers) == 1:
        y1, y2 = lowers[0], uppers[0]
        s = y1 + y2
        meet = L.mk_affine(y1 + s_a, sort)
        f = L.mk_and(
            L.le(y1, -y2, sort),
            L.mk_or(L.le(y1, -y2, sort, strict=True), EQ(x, p, meet)),
        )
        return L.mk_la(s, L.ZERO, f, sort)
    if shape == "eqImpliesLeq" and not eq.pol and len(lowers) + len(uppers) == 1:
        if lowers:
            s = lowers[0] + s_a - xl
        else:
            s = xl + uppers[0] - s_a
        return L.mk_la(s, eps, L.le(s, LinTerm(), sort), sort)
    raise ShapeError(f"unrecognized theory combination clause {clause!r}")


# ---------------------------------------------------------------------------
# Resolution rules


def resolve_nonmixed(i1: Formula, i2: Formula, pivot: Literal, mode: ProjectionMode, partition) -> Formula:
    cls = partition.lit_class(pivot)
    if cls is LitClass.MIXED:
        raise ShapeError("mixed pivot needs a mixed rule")
    in_a, in_b = _owned_by_a(cls, mode)
    if not in_b:
        return L.mk_or(i1, i2)
    if not in_a:
        return L.mk_and(i1, i2)
    return L.mk_and(L.mk_or(i1, L.Lit(pivot)), L.mk_or(i2, L.Lit(-pivot)))


def _occurs(t: Term, in_term: Term) -> bool:
    return t in L.subterms(in_term)


def _lin_mentions(lin: LinTerm, x: Term) -> bool:
    return any(_occurs(x, t) for t in lin.terms())


def _lit_mentions(lit: Literal, x: Term) -> bool:
    return any(_occurs(x, t) for t in lit.atom.terms())


def mentions(f: Formula, x: Term) -> bool:
    return any(_occurs(x, t) for t in L.formula_terms(f))


def resolve_mixed_eq(i1: Formula, i2: Formula, atom: L.EqAtom, reg: AuxRegistry) -> Formula:
    """Replace each EQ(x, s) of I1 by I2 with x := s."""
    x, p = reg.eq(atom)
    memo: dict = {}

    def go(f):
        key = id(f)
        if key in memo:
            return memo[key][1]
        if isinstance(f, EQ) and f.x is x:
            if f.p is not p:
                raise ShapeError("EQ node with a foreign Boolean")
            r = L.substitute(i2, {x: f.s})
        elif isinstance(f, EQ):
            if x in (f.p, f.s) or _occurs(x, f.s):
                raise ShapeError(f"{x!r} outside its EQ nodes")
            r = f
        elif isinstance(f, L.Const):
            r = f
        elif isinstance(f, L.Lit):
            if _lit_mentions(f.lit, x) or _lit_mentions(f.lit, p):
                raise ShapeError(f"{x!r} outside its EQ nodes")
            r = f
        elif isinstance(f, L.And):
            r = L.mk_and(*(go(g) for g in f.args))
        elif isinstance(f, L.Or):
            r = L.mk_or(*(go(g) for g in f.args))
        elif isinstance(f, LA):
            if _lin_mentions(f.s, x):
                raise ShapeError(f"{x!r} inside an LA sum")
            r = L.mk_la(f.s, f.k, go(f.f), f.sort)
        else:
            raise ShapeError(f"unknown node {f!r}")
        memo[key] = (f, r)
        return r

    return go(i1)


def _replace_la(f: Formula, x: Term, fn) -> Formula:
    """Replace the outermost LA nodes whose sum contains x."""
    memo: dict = {}

    def go(g):
        key = id(g)
        if key in memo:
            return memo[key][1]
        if isinstance(g, LA) and g.s.coeff(x) != 0:
            r = fn(g)
        elif isinstance(g, LA):
            r = L.mk_la(g.s, g.k, go(g.f), g.sort)
        elif isinstance(g, (L.And, L.Or)):
            parts = [go(h) for h in g.args]
            r = L.mk_and(*parts) if isinstance(g, L.And) else L.mk_or(*parts)
        elif isinstance(g, L.Lit):
            if _lit_mentions(g.lit, x):
                raise ShapeError(f"{x!r} outside LA nodes")
            r = g
        elif isinstance(g, EQ):
            if _occurs(x, g.s):
                raise ShapeError(f"{x!r} outside LA nodes")
            r = g
        else:
            r = g
        memo[key] = (g, r)
        return r

    return go(f)


def _ceil_div(a, b) -> int:
    return -((-a) // b)


def _floor_term(lin: LinTerm, c: Fraction) -> LinTerm:
    """floor(lin / c) as a linear term over Int."""
    return LinTerm.of_term(L.mk_floordiv(L.mk_affine(lin, L.INT), int(c)))


def combine_la(n1: LA, x1: Term, n2: LA, x2: Term, swap: bool = True, trace: list | None = None) -> Formula:
    """LA(s3, k3, F3) from nodes over x1 (first premise) and x2 (second premise)."""
    c1, c2 = n1.s.coeff(x1), n2.s.coeff(x2)
    if c1 <= 0 or c2 <= 0:
        raise ShapeError("auxiliary variable with non-positive coefficient")
    s1, s2 = n1.s.drop(x1), n2.s.drop(x2)
    sort = n1.sort
    s3 = s1.scale(c2) + s2.scale(c1)
    k1, k2 = n1.k, n2.k
    if sort == L.INT:
        if k1.eps != 0 or k2.eps != 0 or k1.real < -1 or k2.real < -1:
            raise ShapeError("Int LA node with k out of range")
        if c1.denominator != 1 or c2.denominator != 1:
            raise ShapeError("non-integral auxiliary coefficient")
        k3 = c2 * k1.real + c1 * k2.real + c1 * c2
        if trace is not None:
            trace.append((c1, k1.real, c2, k2.real, k3))
        fa, xa, ca, sa, ka, fb, xb = n1.f, x1, c1, s1, k1.real, n2.f, x2
        if swap and _ceil_div(k2.real + 1, c2) < _ceil_div(ka + 1, ca):
            fa, xa, ca, sa, ka, fb, xb = n2.f, x2, c2, s2, k2.real, n1.f, x1
        top = _ceil_div(ka + 1, ca)
        base = _floor_term(-sa, ca)
        disj = []
        for i in range(top + 1):
            va = base.add_const(-i)
            second = L.substitute(fb, {xb: L.mk_affine(-va, L.INT)})
            if i == top:
                disj.append(second)
            else:
                disj.append(L.mk_and(L.substitute(fa, {xa: L.mk_affine(va, L.INT)}), second))
        return L.mk_la(s3, EpsRational(k3), L.mk_or(*disj), sort)
    if k1 not in (L.ZERO, L.NEG_EPS) or k2 not in (L.ZERO, L.NEG_EPS):
        raise ShapeError("Real LA node with k out of range")
    if trace is not None:
        trace.append((c1, k1, c2, k2, None))
    if k1 == L.ZERO and k2 == L.NEG_EPS:
        n1, x1, c1, s1, k1, n2, x2, c2, s2, k2 = n2, x2, c2, s2, k2, n1, x1, c1, s1, k1
    if k1 == L.NEG_EPS:
        f3 = L.substitute(n2.f, {x2: L.mk_affine(s1.scale(1 / c1), L.REAL)})
        return L.mk_la(s3, k2, f3, sort)
    f3 = L.mk_or(
        L.le(s3, LinTerm(), sort, strict=True),
        L.mk_and(
            L.substitute(n1.f, {x1: L.mk_affine(s1.scale(-1 / c1), L.REAL)}),
            L.substitute(n2.f, {x2: L.mk_affine(s1.scale(1 / c1), L.REAL)}),
        ),
    )
    return L.mk_la(s3, L.ZERO, f3, sort)


def resolve_mixed_ineq(
    i1: Formula, i2: Formula, pivot: Literal, reg: AuxRegistry, swap: bool = True, trace: list | None = None
) -> Formula:
    """I1 labels C1 or pivot (carries the aux of the negated pivot), I2 labels C2 or not pivot."""
    x1 = reg.ineq(-pivot)
    x2 = reg.ineq(pivot)
    if not mentions(i1, x1):
        return i1
    return _replace_la(i1, x1, lambda n1: _replace_la(i2, x2, lambda n2: combine_la(n1, x1, n2, x2, swap, trace)))


# ---------------------------------------------------------------------------
# Whole proofs


@dataclass
class Interpolation:
    interpolant: Formula
    patterns: dict  # proof node id -> partial interpolant
    registry: AuxRegistry
    trace: list = field(default_factory=list)


def annotate_proof(root: P.ProofNode, mode: ProjectionMode, partition, reg: AuxRegistry | None = None,
                   swap: bool = True, trace: list | None = None) -> dict:
    reg = reg or AuxRegistry(partition)
    out: dict = {}
    for n in P.postorder(root):
        if n.kind == P.INPUT:
            f = interp_input_leaf(n.clause, n.origin, mode, partition)
        elif n.kind == P.LA:
            f = interp_la_leaf(n.clause, n.farkas, reg, mode, partition)
        elif n.kind == P.EUF:
            f = interp_euf_leaf(n.clause, n.path, reg, mode, partition)
        elif n.kind == P.TC:
            f = interp_tc_leaf(n.clause, n.shape, reg, mode, partition)
        else:
            i1, i2 = out[n.left.id], out[n.right.id]
            cls = partition.lit_class(n.pivot)
            if cls is not LitClass.MIXED:
                f = resolve_nonmixed(i1, i2, n.pivot, mode, partition)
            elif isinstance(n.pivot.atom, L.EqAtom):
                f = resolve_mixed_eq(i1, i2, n.pivot.atom, reg)
            else:
                f = resolve_mixed_ineq(i1, i2, n.pivot, reg, swap, trace)
        out[n.id] = f
    return out


def finalize(pattern: Formula, reg: AuxRegistry | None = None) -> Formula:
    """Unfold LA nodes and simplify; fails on leftover auxiliary symbols."""
    def go(f):
        if isinstance(f, LA):
            return go(f.f)
        if isinstance(f, EQ):
            raise ShapeError("EQ node at the root")
        if isinstance(f, L.And):
            return L.mk_and(*(go(g) for g in f.args))
        if isinstance(f, L.Or):
            return L.mk_or(*(go(g) for g in f.args))
        return f

    out = go(pattern)
    if reg is not None:
        left = {s for s in L.formula_symbols(out) if s in reg.names}
        if left:
            raise ShapeError(f"auxiliary symbols left in the interpolant: {sorted(left)}")
    return out


def interpolate(problem, root: P.ProofNode, mode: ProjectionMode = ProjectionMode.PUDLAK, swap: bool = True) -> Interpolation:
    """Interpolant of the problem's A and B parts from a refutation."""
    from .verification import decode_floor_div

    reg = AuxRegistry(problem.partition)
    trace: list = []
    patterns = annotate_proof(root, mode, problem.partition, reg, swap, trace)
    final = finalize(patterns[root.id], reg)
    final = decode_floor_div(final, problem.div_table)
    return Interpolation(final, patterns, reg, trace)
