"""Brute-force oracles for the LA combination rule and for literal projection."""
from __future__ import annotations

import math
import random
from fractions import Fraction

from mixinterp import logic as L
from mixinterp.frontend import LitClass, PartitionInfo, SymClass
from mixinterp.interpolation import AuxRegistry, ProjectionMode, combine_la, project
from mixinterp.logic import EpsRational, LinTerm

# -- LA node pairs ---------------------------------------------------------


def _shared(sort):
    tag = "i" if sort == L.INT else "r"
    return [L.mk_var(f"pu{tag}", sort), L.mk_var(f"pv{tag}", sort)]


def _aux(sort):
    tag = "i" if sort == L.INT else "r"
    return L.mk_var(f"@px1{tag}", sort), L.mk_var(f"@px2{tag}", sort)


def _random_lin(rng, xs):
    return LinTerm({x: rng.randint(-2, 2) for x in xs}, rng.randint(-3, 3))


def _side_condition(rng, sort, xs, aux):
    roll = rng.random()
    if roll < 0.2:
        return L.TRUE
    if roll < 0.6:
        return L.le(_random_lin(rng, xs), LinTerm(), sort, strict=rng.random() < 0.3)
    # downward closed in the aux variable
    lhs = LinTerm({aux: rng.randint(1, 2), rng.choice(xs): rng.randint(-2, 2)})
    return L.le(lhs, LinTerm.const_of(rng.randint(-3, 3)), sort)


def random_la_node(rng, sort, aux, xs, extra_aux=()):
    """LA(s + c*aux, k, F) with F monotone, false above 0 and true below -k."""
    c = rng.randint(1, 3)
    s = _random_lin(rng, xs) + LinTerm({aux: c}) + LinTerm({e: rng.randint(1, 2) for e in extra_aux})
    if sort == L.INT:
        k = rng.randint(-1, 3)
        parts = [L.le(s, LinTerm.const_of(-k - 1), sort)]
        for j in range(0, k + 1):
            if rng.random() < 0.6:
                parts.append(L.mk_and(L.le(s, LinTerm.const_of(-j), sort), _side_condition(rng, sort, xs, aux)))
        return L.mk_la(s, EpsRational(k), L.mk_or(*parts), sort)
    if rng.random() < 0.5:
        return L.mk_la(s, L.NEG_EPS, L.le(s, LinTerm(), sort), sort)
    g = _side_condition(rng, sort, xs, aux) if rng.random() < 0.5 else L.le(_random_lin(rng, xs), LinTerm(), sort)
    f = L.mk_or(L.le(s, LinTerm(), sort, strict=True), L.mk_and(L.le(s, LinTerm(), sort), g))
    return L.mk_la(s, L.ZERO, f, sort)


def _witness_candidates(sort, s1, c1, s2, c2):
    hi = -s1 / c1  # F1(x1) needs x1 <= hi
    lo = s2 / c2  # F2(-x1) needs x1 >= lo
    if sort == L.INT:
        grid = set(range(-10, 11))
        if math.ceil(lo) <= math.floor(hi):
            grid.update(range(math.ceil(lo), math.floor(hi) + 1))
        return [Fraction(v) for v in sorted(grid)]
    grid = {Fraction(v, 2) for v in range(-20, 21)}
    grid.update({hi, lo, (hi + lo) / 2})
    return sorted(grid)


def la_pair_counterexamples(seed: int, sort: str, samples: int = 25) -> list:
    """F3 against an explicit search for x1 with F1(x1) and F2(-x1)."""
    rng = random.Random(seed)
    xs = _shared(sort)
    x1, x2 = _aux(sort)
    n1 = random_la_node(rng, sort, x1, xs)
    n2 = random_la_node(rng, sort, x2, xs)
    if not (isinstance(n1, L.LA) and isinstance(n2, L.LA)):
        return []
    combined = combine_la(n1, x1, n2, x2)
    c1, c2 = n1.s.coeff(x1), n2.s.coeff(x2)
    bad = []
    for _ in range(samples):
        if sort == L.INT:
            vals = {x: Fraction(rng.randint(-10, 10)) for x in xs}
        else:
            vals = {x: Fraction(rng.randint(-20, 20), 2) for x in xs}
        m = L.Model(dict(vals))
        got = L.evaluate(combined, m)
        s1 = L.eval_lin(n1.s.drop(x1), m)
        s2 = L.eval_lin(n2.s.drop(x2), m)
        want = False
        for v in _witness_candidates(sort, s1, c1, s2, c2):
            m.values[x1], m.values[x2] = v, -v
            if L.evaluate(n1.f, m) and L.evaluate(n2.f, m):
                want = True
                break
        if got != want:
            bad.append((seed, {x.name: vals[x] for x in xs}, got, want))
    return bad


# -- projection ------------------------------------------------------------

U = "PU"


def projection_partition():
    names = {"ga": SymClass.A, "ha": SymClass.A, "gb": SymClass.B, "hb": SymClass.B,
             "gs": SymClass.SHARED, "hs": SymClass.SHARED}
    cls = {}
    for sort, tag in ((L.INT, "i"), (L.REAL, "r"), (U, "u")):
        for n, c in names.items():
            cls[n + tag] = c
    cls["pf"] = SymClass.SHARED
    return PartitionInfo(cls)


def _pool(sort, cls):
    tag = {L.INT: "i", L.REAL: "r", U: "u"}[sort]
    a = [L.mk_var(n + tag, sort) for n in ("ga", "ha")]
    b = [L.mk_var(n + tag, sort) for n in ("gb", "hb")]
    s = [L.mk_var(n + tag, sort) for n in ("gs", "hs")]
    return {"A": (a, s), "B": (b, s), "S": (s, []), "M": (a, b)}[cls]


def random_literal(rng, cls: str):
    """A literal whose symbols fall in the given class (A, B, S or M)."""
    for _ in range(100):
        sort = rng.choice([L.INT, L.REAL, U])
        must, extra = _pool(sort, cls)
        if cls == "M":
            picks = [rng.choice(must), rng.choice(extra)]
            if sort != U and rng.random() < 0.5:
                picks.append(L.mk_var("gs" + {L.INT: "i", L.REAL: "r"}[sort], sort))
        else:
            picks = [rng.choice(must)] + rng.sample(must + extra, rng.randint(0, 1))
        if sort == U:
            t, u = picks[0], picks[1] if len(picks) > 1 else rng.choice(must + extra)
            if rng.random() < 0.3 and cls != "M":
                t = L.mk_app("pf", [t], U) if cls == "S" else t
            f = L.mk_eq(t, u)
        elif rng.random() < 0.3 and len(picks) >= 2:
            f = L.mk_eq(L.mk_affine(LinTerm({picks[0]: rng.choice([1, 2])}), sort),
                        L.mk_affine(LinTerm({t: rng.choice([-1, 1]) for t in picks[1:]}, rng.randint(-2, 2)), sort))
        else:
            lhs = LinTerm({t: rng.choice([-2, -1, 1, 2]) for t in picks})
            f = L.le(lhs, LinTerm.const_of(rng.randint(-3, 3)), sort, strict=rng.random() < 0.3)
        if not isinstance(f, L.Lit):
            continue
        lit = f.lit if rng.random() < 0.5 else -f.lit
        return lit
    raise RuntimeError("no literal generated")


def _values(rng, sort):
    if sort == L.INT:
        return Fraction(rng.randint(-3, 3))
    if sort == L.REAL:
        return Fraction(rng.randint(-6, 6), 2)
    return rng.randrange(3)


def _aux_domain(sort):
    if sort == L.INT:
        return [Fraction(v) for v in range(-16, 17)]
    if sort == L.REAL:
        return [Fraction(v, 2) for v in range(-32, 33)]
    return list(range(3))


def projection_counterexamples(seed: int, cls: str, mode: ProjectionMode, models: int = 12) -> list:
    rng = random.Random(seed)
    part = projection_partition()
    lit = random_literal(rng, cls)
    expect = {"A": LitClass.A, "B": LitClass.B, "S": LitClass.SHARED, "M": LitClass.MIXED}[cls]
    if part.lit_class(lit) is not expect:
        return [(seed, lit, "class", part.lit_class(lit))]
    reg = AuxRegistry(part)
    both = L.mk_and(project(lit, "A", mode, reg, part), project(lit, "B", mode, reg, part))
    both = L.expand_patterns(both)
    aux_terms = [L.mk_var(n, s) for n, s in _aux_vars(both, reg)]
    bad = []
    fn_table = {(v,): (v + 1) % 3 for v in range(3)}
    for _ in range(models):
        m = L.Model({}, {"pf": fn_table})
        for t in L.atom_terms(lit.atom):
            for sub in L.subterms(t):
                if sub.kind == "var":
                    m.values.setdefault(sub, _values(rng, sub.sort))
        want = L.eval_literal(lit, m)
        got = _exists(both, m, aux_terms)
        if got != want:
            bad.append((seed, lit, got, want))
    return bad


def _aux_vars(f, reg):
    syms = L.formula_symbols(f)
    out = []
    for t in list(reg.ineq_aux.values()) + [v for pair in reg.eq_aux.values() for v in pair]:
        if t.name in syms:
            out.append((t.name, t.sort))
    return out


def _exists(f, m, aux_terms):
    if not aux_terms:
        return L.evaluate(f, m)
    t, rest = aux_terms[0], aux_terms[1:]
    dom = [False, True] if t.sort == L.BOOL else _aux_domain(t.sort)
    for v in dom:
        m.values[t] = v
        if _exists(f, m, rest):
            del m.values[t]
            return True
    del m.values[t]
    return False
