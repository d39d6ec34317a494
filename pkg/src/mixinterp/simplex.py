"""Exact simplex over Q_eps with Farkas certificates, branching and equality detection."""
from __future__ import annotations

import math
from fractions import Fraction

from . import logic as L
from .logic import EpsRational, LinTerm, Literal


class BranchError(Exception):
    pass


def _neg_bound(atom: L.LAAtom) -> EpsRational:
    """Lower bound on the atom's lhs implied by the negated literal."""
    if atom.sort == L.INT:
        return EpsRational(atom.bound.real + 1)
    return EpsRational(atom.bound.real, atom.bound.eps + 1)


def integral_certificate(coeffs: dict) -> dict:
    """Scale positive rational coefficients to coprime integers."""
    if not coeffs:
        return {}
    den = 1
    for c in coeffs.values():
        den = den * c.denominator // math.gcd(den, c.denominator)
    ints = {k: c * den for k, c in coeffs.items()}
    g = 0
    for c in ints.values():
        g = math.gcd(g, int(c))
    return {k: Fraction(int(c) // g) for k, c in ints.items()}


class LASolver:
    """Bland-rule simplex built from scratch for a set of inequality literals."""

    def __init__(self, sort: str, lits=(), extra_terms=()):
        self.sort = sort
        lits = sorted({l for l in lits if isinstance(l.atom, L.LAAtom)}, key=Literal.sort_key)
        self.lits = lits
        terms = set()
        for l in lits:
            terms.update(l.atom.lhs.terms())
        for t in extra_terms:
            terms.update(LinTerm.of_term(t).terms())
        self.cols = sorted(terms, key=lambda t: t.idx)
        self.col_of = {t: i for i, t in enumerate(self.cols)}
        self.defs: list[LinTerm] = [LinTerm.of_term(t) for t in self.cols]
        self.var_of_lhs: dict = {}
        for i, t in enumerate(self.cols):
            self.var_of_lhs[LinTerm.of_term(t).key()] = i
        self.rows: dict[int, dict[int, Fraction]] = {}
        n = len(self.cols)
        self.lower: list = [None] * n
        self.upper: list = [None] * n
        self.value: list = [L.ZERO] * n
        self.conflict = None
        for l in lits:
            self._var_for(l.atom.lhs)
        for l in lits:
            if self.conflict is None:
                self._assert(l)

    # -- construction -----------------------------------------------------
    def _var_for(self, lhs: LinTerm) -> int:
        key = lhs.key()
        v = self.var_of_lhs.get(key)
        if v is not None:
            return v
        v = len(self.defs)
        self.defs.append(lhs)
        self.var_of_lhs[key] = v
        self.lower.append(None)
        self.upper.append(None)
        row: dict[int, Fraction] = {}
        for t, c in lhs.coeffs:
            j = self.col_of[t]
            if j in self.rows:  # never: columns start non-basic
                raise AssertionError
            row[j] = row.get(j, Fraction(0)) + c
        self.rows[v] = row
        self.value.append(self._row_value(row))
        return v

    def _row_value(self, row) -> EpsRational:
        acc = L.ZERO
        for j, c in row.items():
            acc = acc + self.value[j].scale(c)
        return acc

    def _assert(self, lit: Literal):
        atom = lit.atom
        v = self.var_of_lhs[atom.lhs.key()]
        if lit.pol:
            b = atom.bound
            if self.upper[v] is None or b < self.upper[v][0]:
                self.upper[v] = (b, lit)
        else:
            b = _neg_bound(atom)
            if self.lower[v] is None or b > self.lower[v][0]:
                self.lower[v] = (b, lit)
        lo, up = self.lower[v], self.upper[v]
        if lo is not None and up is not None and lo[0] > up[0]:
            self.conflict = {lo[1]: Fraction(1), up[1]: Fraction(1)}
            return
        if v not in self.rows:
            cur = self.value[v]
            if lo is not None and cur < lo[0]:
                self._update(v, lo[0])
            elif up is not None and cur > up[0]:
                self._update(v, up[0])

    # -- simplex ----------------------------------------------------------
    def _update(self, j: int, val: EpsRational):
        delta = val - self.value[j]
        self.value[j] = val
        for i, row in self.rows.items():
            c = row.get(j)
            if c:
                self.value[i] = self.value[i] + delta.scale(c)

    def _pivot(self, i: int, j: int):
        row = self.rows.pop(i)
        a = row.pop(j)
        new = {k: -c / a for k, c in row.items()}
        new[i] = 1 / a
        self.rows[j] = new
        for k, r in self.rows.items():
            if k == j:
                continue
            c = r.pop(j, None)
            if c:
                for m, d in new.items():
                    nv = r.get(m, Fraction(0)) + c * d
                    if nv:
                        r[m] = nv
                    else:
                        r.pop(m, None)

    def _pivot_and_update(self, i: int, j: int, val: EpsRational):
        a = self.rows[i][j]
        theta = (val - self.value[i]).scale(1 / a)
        self.value[i] = val
        self.value[j] = self.value[j] + theta
        for k, r in self.rows.items():
            if k != i:
                c = r.get(j)
                if c:
                    self.value[k] = self.value[k] + theta.scale(c)
        self._pivot(i, j)

    def _below(self, v):
        lo = self.lower[v]
        return lo is not None and self.value[v] < lo[0]

    def _above(self, v):
        up = self.upper[v]
        return up is not None and self.value[v] > up[0]

    def check(self):
        """None if feasible, else a Farkas certificate {literal: coefficient}."""
        if self.conflict is not None:
            return integral_certificate(self.conflict)
        while True:
            bad = None
            for i in sorted(self.rows):
                if self._below(i) or self._above(i):
                    bad = i
                    break
            if bad is None:
                return None
            i = bad
            row = self.rows[i]
            increase = self._below(i)
            chosen = None
            for j in sorted(row):
                a = row[j]
                up, lo = self.upper[j], self.lower[j]
                can_inc = up is None or self.value[j] < up[0]
                can_dec = lo is None or self.value[j] > lo[0]
                if increase and ((a > 0 and can_inc) or (a < 0 and can_dec)):
                    chosen = j
                    break
                if not increase and ((a < 0 and can_inc) or (a > 0 and can_dec)):
                    chosen = j
                    break
            if chosen is None:
                cert: dict = {}

                def add(lit, c):
                    cert[lit] = cert.get(lit, Fraction(0)) + c

                if increase:
                    add(self.lower[i][1], Fraction(1))
                    for j, a in row.items():
                        add(self.upper[j][1] if a > 0 else self.lower[j][1], abs(a))
                else:
                    add(self.upper[i][1], Fraction(1))
                    for j, a in row.items():
                        add(self.lower[j][1] if a > 0 else self.upper[j][1], abs(a))
                self.conflict = cert
                return integral_certificate(cert)
            target = self.lower[i][0] if increase else self.upper[i][0]
            self._pivot_and_update(i, chosen, target)

    # -- models -----------------------------------------------------------
    def delta(self) -> Fraction:
        d = Fraction(1)
        for v in range(len(self.defs)):
            val = self.value[v]
            for lo, hi in ((self.lower[v] and self.lower[v][0], val), (val, self.upper[v] and self.upper[v][0])):
                if lo is None or hi is None:
                    continue
                if lo.real < hi.real and lo.eps > hi.eps:
                    d = min(d, (hi.real - lo.real) / (lo.eps - hi.eps))
        return d / 2 if d < 1 else d

    def eps_values(self) -> dict:
        return {t: self.value[i] for i, t in enumerate(self.cols)}

    def model_values(self) -> dict:
        d = self.delta()
        return {t: self.value[i].real + self.value[i].eps * d for i, t in enumerate(self.cols)}

    def lin_value(self, lin: LinTerm, values: dict | None = None) -> Fraction:
        values = values if values is not None else self.model_values()
        acc = lin.const
        for t, c in lin.coeffs:
            acc += c * values[t]
        return acc

    # -- branching --------------------------------------------------------
    def _tight_vectors(self) -> list[LinTerm]:
        out = []
        for v in range(len(self.defs)):
            val = self.value[v]
            if (self.lower[v] and self.lower[v][0] == val) or (self.upper[v] and self.upper[v][0] == val):
                out.append(self.defs[v])
        return out

    def branch(self, extended: bool = False) -> Literal:
        """Branch literal for a non-integral Int column (floor split)."""
        if self.sort != L.INT:
            raise BranchError("branching only in Int mode")
        values = self.model_values()
        frac = [t for t in self.cols if values[t].denominator != 1]
        if not frac:
            raise BranchError("assignment already integral")
        # a column boxed by its own bounds can only be split finitely often
        boxed = [t for t in frac if self.lower[self.col_of[t]] is not None and self.upper[self.col_of[t]] is not None]
        if boxed:
            t = boxed[0]
            return _branch_lit(LinTerm.of_term(t), values[t])
        if extended:
            span = _Span(self._tight_vectors())
            cands = [LinTerm.of_term(t) for t in self.cols]
            for i, u in enumerate(self.cols):
                for w in self.cols[i + 1 :]:
                    cands.append(LinTerm(((u, 1), (w, -1))))
            for cand in cands:
                val = self.lin_value(cand, values)
                if val.denominator != 1 and span.contains(cand):
                    return _branch_lit(cand, val)
        t = frac[0]
        return _branch_lit(LinTerm.of_term(t), values[t])

    def implies_le(self, lin: LinTerm) -> bool:
        """Whether the asserted literals imply lin <= 0 (over Q, or Z in Int mode bounds)."""
        f = L.le(LinTerm(), lin, self.sort, strict=True)  # lin > 0
        if f == L.FALSE:
            return True
        if f == L.TRUE:
            return False
        probe = LASolver(self.sort, list(self.lits) + [f.lit])
        return probe.check() is not None


def _branch_lit(lin: LinTerm, val: Fraction) -> Literal:
    f = L.le(lin, LinTerm.const_of(math.floor(val)), L.INT)
    if not isinstance(f, L.Lit):
        raise BranchError("degenerate branch")
    return f.lit


class _Span:
    """Membership in the rational span of a set of linear forms."""

    def __init__(self, vecs):
        self.basis: list[tuple[int, dict]] = []
        for v in vecs:
            self._insert({t.idx: c for t, c in v.coeffs})

    def _reduce(self, vec: dict) -> dict:
        vec = dict(vec)
        for piv, b in self.basis:
            c = vec.get(piv)
            if c:
                for k, d in b.items():
                    nv = vec.get(k, Fraction(0)) - c * d
                    if nv:
                        vec[k] = nv
                    else:
                        vec.pop(k, None)
        return vec

    def _insert(self, vec: dict):
        vec = self._reduce(vec)
        if not vec:
            return
        piv = min(vec)
        c = vec[piv]
        vec = {k: d / c for k, d in vec.items()}
        new_basis = []
        for p, b in self.basis:
            e = b.get(piv)
            if e:
                b = {k: b.get(k, Fraction(0)) - e * vec.get(k, Fraction(0)) for k in set(b) | set(vec)}
                b = {k: d for k, d in b.items() if d}
            new_basis.append((p, b))
        new_basis.append((piv, vec))
        self.basis = new_basis

    def contains(self, lin: LinTerm) -> bool:
        return not self._reduce({t.idx: c for t, c in lin.coeffs})


# ---------------------------------------------------------------------------
# Functional interface


def la_check(asserted, sort: str):
    """None when rationally feasible, else (lemma clause, Farkas certificate)."""
    s = LASolver(sort, asserted)
    cert = s.check()
    if cert is None:
        return None
    return L.Clause([-l for l in cert]), cert


def la_branch(asserted, sort: str = L.INT, extended: bool = False, extra_terms=()) -> Literal:
    s = LASolver(sort, asserted, extra_terms)
    if s.check() is not None:
        raise BranchError("constraints are infeasible")
    return s.branch(extended)


def trichotomy_clause(u: L.Term, v: L.Term):
    """u = v or u < v or u > v, as normalized literals; None if degenerate."""
    sort = u.sort
    eq = L.mk_eq(u, v)
    lt = L.le(LinTerm.of_term(u), LinTerm.of_term(v), sort, strict=True)
    gt = L.le(LinTerm.of_term(v), LinTerm.of_term(u), sort, strict=True)
    if not all(isinstance(f, L.Lit) for f in (eq, lt, gt)):
        return None
    return L.Clause([eq.lit, lt.lit, gt.lit])


def eq_implies_leq_clause(u: L.Term, v: L.Term):
    """u != v or u <= v; None if degenerate."""
    eq = L.mk_eq(u, v)
    le = L.le(LinTerm.of_term(u), LinTerm.of_term(v), u.sort)
    if not (isinstance(eq, L.Lit) and isinstance(le, L.Lit)):
        return None
    return L.Clause([-eq.lit, le.lit])


def la_propagate_equalities(asserted, pairs, sort: str, diseqs=()):
    """TC instances for pairs whose equality (or one inequality) the bounds force."""
    s = LASolver(sort, asserted)
    if s.check() is not None:
        return []
    out = []
    for u, v in pairs:
        d = LinTerm.of_term(u) - LinTerm.of_term(v)
        if d.is_const():
            continue
        if s.implies_le(d) and s.implies_le(-d):
            c = trichotomy_clause(u, v)
            if c is not None:
                out.append(("trichotomy", c))
    for u, v in diseqs:
        d = LinTerm.of_term(u) - LinTerm.of_term(v)
        if d.is_const():
            continue
        if s.implies_le(d):
            c = eq_implies_leq_clause(v, u)
            if c is not None:
                out.append(("eqImpliesLeq", c))
        elif s.implies_le(-d):
            c = eq_implies_leq_clause(u, v)
            if c is not None:
                out.append(("eqImpliesLeq", c))
    return out
