"""DPLL(T) search recording a resolution proof over input, theory and TC leaves."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import logic as L
from . import proof as P
from .euf import closure, euf_check, lemma_clause
from .logic import Clause, LinTerm, Literal
from .simplex import LASolver, eq_implies_leq_clause, trichotomy_clause


class ResourceLimit(Exception):
    pass


class SolverError(Exception):
    pass


@dataclass
class SolverConfig:
    budget: int = 200_000
    seed: int = 0
    extended_branches: bool = False
    check_model: bool = True
    # plain branch-and-bound can run away on unbounded Int problems, and every
    # branch makes the next simplex rebuild slower
    max_branches: int = 100


@dataclass
class Sat:
    model: L.Model


@dataclass
class Unsat:
    root: P.ProofNode


class _Rec:
    __slots__ = ("lits", "node")

    def __init__(self, lits, node):
        self.lits = lits
        self.node = node


class _Unsat(Exception):
    def __init__(self, root):
        self.root = root


@dataclass
class Stats:
    decisions: int = 0
    conflicts: int = 0
    theory_checks: int = 0
    branches: int = 0
    lemmas: int = 0


class Solver:
    def __init__(self, problem, config: SolverConfig | None = None):
        self.problem = problem
        self.cfg = config or SolverConfig()
        self.sort = problem.sort
        self.stats = Stats()
        self.atoms: list = []
        self.var_of: dict = {}
        self.vals: list = []
        self.level: list = []
        self.reason: list = []
        self.activity: list = []
        self.phase: list = []
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.checked_len = 0
        self.watches: dict[int, list] = {}
        self.pending: list = []
        self.bump_inc = 1.0
        self.rng = random.Random(self.cfg.seed) if self.cfg.seed else None
        self.interface: dict = {}  # arithmetic interface terms (ordered dict as set)
        self.app_terms: dict = {}
        self.all_terms: dict = {}

    # -- encoding ---------------------------------------------------------
    def var(self, atom) -> int:
        v = self.var_of.get(atom)
        if v is not None:
            return v
        v = len(self.atoms)
        self.atoms.append(atom)
        self.var_of[atom] = v
        self.vals.append(None)
        self.level.append(0)
        self.reason.append(None)
        self.activity.append(self.rng.random() * 1e-3 if self.rng else 0.0)
        self.phase.append(False)
        self.watches[2 * v] = []
        self.watches[2 * v + 1] = []
        self._note_terms(atom)
        if isinstance(atom, L.EqAtom) and atom.lhs.is_arith:
            u, w = atom.lhs, atom.rhs
            tri = trichotomy_clause(u, w)
            if tri is not None:
                self.pending.append(P.tc_leaf(tri, "trichotomy"))
            for a, b in ((u, w), (w, u)):
                c = eq_implies_leq_clause(a, b)
                if c is not None:
                    self.pending.append(P.tc_leaf(c, "eqImpliesLeq"))
        return v

    def _note_terms(self, atom):
        roots = list(atom.terms()) if not isinstance(atom, L.BoolAtom) else []
        if isinstance(atom, L.EqAtom):
            for t in roots:
                if t.is_arith:
                    self.interface[t] = None
        for r in roots:
            for t in L.subterms(r):
                self.all_terms[t] = None
                if t.kind == "app":
                    self.app_terms[t] = None
                    if t.is_arith:
                        self.interface[t] = None
                    for a in t.args:
                        if a.is_arith:
                            self.interface[a] = None

    def enc(self, lit: Literal) -> int:
        return 2 * self.var(lit.atom) + (0 if lit.pol else 1)

    def dec(self, code: int) -> Literal:
        return Literal(self.atoms[code >> 1], not (code & 1))

    def value(self, code: int):
        v = self.vals[code >> 1]
        if v is None:
            return None
        return v != bool(code & 1)

    @property
    def cur_level(self) -> int:
        return len(self.trail_lim)

    # -- assignment -------------------------------------------------------
    def assign(self, code: int, reason):
        v = code >> 1
        self.vals[v] = not (code & 1)
        self.level[v] = self.cur_level
        self.reason[v] = reason
        self.phase[v] = self.vals[v]
        self.trail.append(code)

    def backtrack(self, lvl: int):
        if self.cur_level <= lvl:
            return
        pos = self.trail_lim[lvl]
        for code in self.trail[pos:]:
            v = code >> 1
            self.vals[v] = None
            self.reason[v] = None
        del self.trail[pos:]
        del self.trail_lim[lvl:]
        self.qhead = min(self.qhead, len(self.trail))
        self.checked_len = min(self.checked_len, len(self.trail))

    def new_level(self):
        self.trail_lim.append(len(self.trail))

    # -- clauses ----------------------------------------------------------
    def attach(self, node: P.ProofNode):
        """Add a clause; returns a conflicting record or None."""
        lits = [self.enc(l) for l in node.clause]
        if not lits:
            raise _Unsat(node)
        rec = _Rec(lits, node)
        if len(lits) == 1:
            c = lits[0]
            val = self.value(c)
            if val is False and self.level[c >> 1] == 0:
                return rec
            if val is True and self.level[c >> 1] == 0:
                return None
            self.backtrack(0)
            self.assign(c, rec)
            return None

        def key(c):
            val = self.value(c)
            if val is None:
                return (1, 0)
            lvl = self.level[c >> 1]
            return (0, lvl) if val else (2, -lvl)

        lits.sort(key=key)
        self.watches[lits[0]].append(rec)
        self.watches[lits[1]].append(rec)
        s0 = self.value(lits[0])
        if s0 is False:
            return rec
        if s0 is None and self.value(lits[1]) is False:
            self.backtrack(self.level[lits[1] >> 1])
            self.assign(lits[0], rec)
        return None

    def flush(self):
        while self.pending:
            node = self.pending.pop(0)
            confl = self.attach(node)
            if confl is not None:
                return confl
        return None

    def propagate(self):
        while self.qhead < len(self.trail):
            p = self.trail[self.qhead]
            self.qhead += 1
            false_lit = p ^ 1
            ws = self.watches[false_lit]
            keep = []
            i = 0
            confl = None
            while i < len(ws):
                rec = ws[i]
                i += 1
                lits = rec.lits
                if lits[0] == false_lit:
                    lits[0], lits[1] = lits[1], lits[0]
                if self.value(lits[0]) is True:
                    keep.append(rec)
                    continue
                found = False
                for k in range(2, len(lits)):
                    if self.value(lits[k]) is not False:
                        lits[1], lits[k] = lits[k], lits[1]
                        self.watches[lits[1]].append(rec)
                        found = True
                        break
                if found:
                    continue
                keep.append(rec)
                if self.value(lits[0]) is False:
                    confl = rec
                    keep.extend(ws[i:])
                    break
                self.assign(lits[0], rec)
            self.watches[false_lit] = keep
            if confl is not None:
                return confl
        return None

    # -- conflicts --------------------------------------------------------
    def analyze(self, rec: _Rec):
        lits = rec.lits
        maxlvl = max(self.level[c >> 1] for c in lits)
        if maxlvl == 0:
            self.backtrack(0)
            raise _Unsat(self._refute(rec))
        self.backtrack(maxlvl)
        node = rec.node
        cl = set(lits)
        at_level = [c for c in cl if self.level[c >> 1] == maxlvl]
        count = len(at_level)
        idx = len(self.trail) - 1
        while count > 1:
            while (self.trail[idx] ^ 1) not in cl:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            r = self.reason[p >> 1]
            if r is None:
                raise SolverError("decision reached before the UIP")
            node = P.resolve(r.node, node, self.dec(p))
            cl.discard(p ^ 1)
            count -= 1
            for c in r.lits:
                if c != p and c not in cl:
                    cl.add(c)
                    if self.level[c >> 1] == maxlvl:
                        count += 1
        learned = sorted(cl, key=lambda c: (-self.level[c >> 1], c))
        for c in learned:
            self.activity[c >> 1] += self.bump_inc
        self.bump_inc /= 0.95
        if self.bump_inc > 1e100:
            self.activity = [a * 1e-100 for a in self.activity]
            self.bump_inc *= 1e-100
        bt = self.level[learned[1] >> 1] if len(learned) > 1 else 0
        self.backtrack(bt)
        new = _Rec(learned, node)
        if len(learned) > 1:
            self.watches[learned[0]].append(new)
            self.watches[learned[1]].append(new)
        self.assign(learned[0], new)

    def _refute(self, rec: _Rec) -> P.ProofNode:
        node = rec.node
        cl = set(rec.lits)
        for p in reversed(self.trail):
            if (p ^ 1) in cl:
                r = self.reason[p >> 1]
                if r is None:
                    raise SolverError("decision at level 0")
                node = P.resolve(r.node, node, self.dec(p))
                cl.discard(p ^ 1)
                cl.update(c for c in r.lits if c != p)
        if cl or node.clause:
            raise SolverError("refutation left literals")
        return node

    # -- theory -----------------------------------------------------------
    def _theory_lits(self):
        eqs, las = [], []
        for code in self.trail:
            a = self.atoms[code >> 1]
            if isinstance(a, L.EqAtom):
                eqs.append(self.dec(code))
            elif isinstance(a, L.LAAtom):
                las.append(self.dec(code))
        return eqs, las

    def _arith_interface(self):
        return [t for t in sorted(self.interface, key=lambda t: t.idx) if t.is_arith]

    def theory_check(self):
        if len(self.trail) <= self.checked_len:
            return None
        if not any(not isinstance(self.atoms[c >> 1], L.BoolAtom) for c in self.trail[self.checked_len :]):
            self.checked_len = len(self.trail)
            return None
        self.stats.theory_checks += 1
        eqs, las = self._theory_lits()
        r = euf_check(eqs, self._app_list())
        if r is not None:
            clause, path = r
            self.stats.lemmas += 1
            return self._add_lemma(P.euf_leaf(clause, path))
        if las:
            solver = LASolver(self.sort, las)
            cert = solver.check()
            if cert is not None:
                self.stats.lemmas += 1
                return self._add_lemma(P.la_leaf(Clause([-l for l in cert]), cert))
        self.checked_len = len(self.trail)
        return None

    def _app_list(self):
        return sorted(self.app_terms, key=lambda t: t.idx)

    def _add_lemma(self, node):
        confl = self.attach(node)
        if confl is None:
            raise SolverError(f"theory lemma {node.clause!r} is not conflicting")
        return confl

    def final_check(self):
        """'sat' or None (search continues after new atoms/clauses/decisions)."""
        eqs, las = self._theory_lits()
        iface = self._arith_interface()
        la = LASolver(self.sort, las, iface)
        if la.check() is not None:
            raise SolverError("final check on an inconsistent state")
        if self.sort == L.INT:
            values = la.model_values()
            if any(v.denominator != 1 for v in values.values()):
                if self.stats.branches >= self.cfg.max_branches:
                    raise ResourceLimit(f"{self.cfg.max_branches} integer branches without a verdict")
                lit = la.branch(self.cfg.extended_branches)
                self.stats.branches += 1
                code = self.enc(lit)
                if self.value(code) is not None:
                    raise SolverError(f"branch literal {lit!r} already assigned")
                self._decide(code)
                return None
        values = la.model_values()
        cc = closure(eqs, self._app_list() + iface)

        def val(t):
            return la.lin_value(LinTerm.of_term(t), values)

        # EUF-equal terms must agree in LA
        classes: dict = {}
        for t in iface:
            classes.setdefault(cc.find(t), []).append(t)
        for members in classes.values():
            first = members[0]
            for t in members[1:]:
                if val(t) != val(first):
                    f = L.mk_eq(first, t)
                    if not isinstance(f, L.Lit):
                        raise SolverError("constant equality between distinct values")
                    path = cc.explain(f.lit.atom.lhs, f.lit.atom.rhs)
                    node = P.euf_leaf(lemma_clause(f.lit.atom, path), path)
                    self.stats.lemmas += 1
                    self.var(f.lit.atom)
                    self.pending.append(node)
                    return None
        # LA-equal terms must be EUF-equal
        by_val: dict = {}
        for t in iface:
            by_val.setdefault((t.sort, val(t)), []).append(t)
        for (_, _), members in sorted(by_val.items(), key=lambda kv: min(t.idx for t in kv[1])):
            for i, t in enumerate(members):
                for u in members[i + 1 :]:
                    if cc.find(t) is cc.find(u):
                        continue
                    f = L.mk_eq(t, u)
                    if not isinstance(f, L.Lit):
                        continue
                    code = self.enc(f.lit)
                    if self.value(code) is not None:
                        raise SolverError(f"equality {f.lit!r} assigned but not respected")
                    self._decide(code)
                    return None
        return "sat"

    def _decide(self, code: int):
        self.stats.decisions += 1
        self._charge()
        self.new_level()
        self.assign(code, None)

    def _charge(self):
        if self.stats.decisions + self.stats.conflicts > self.cfg.budget:
            raise ResourceLimit(f"budget of {self.cfg.budget} decisions and conflicts exhausted")

    def decide(self) -> bool:
        best = -1
        best_act = -1.0
        for v, val in enumerate(self.vals):
            if val is None and self.activity[v] > best_act:
                best, best_act = v, self.activity[v]
        if best < 0:
            return False
        self._decide(2 * best + (0 if self.phase[best] else 1))
        return True

    # -- model ------------------------------------------------------------
    def build_model(self) -> L.Model:
        eqs, las = self._theory_lits()
        iface = self._arith_interface()
        la = LASolver(self.sort, las, iface)
        la.check()
        values = la.model_values()
        apps = self._app_list()
        cc = closure(eqs, apps + iface + [t for t in self.all_terms if not t.is_arith])
        cls_val: dict = {}
        for t in sorted(cc.parent, key=lambda t: t.idx):
            if t.is_arith:
                try:
                    cls_val.setdefault(cc.find(t), la.lin_value(LinTerm.of_term(t), values))
                except KeyError:
                    pass
        counter: dict = {}
        for t in sorted(cc.parent, key=lambda t: t.idx):
            if not t.is_arith:
                r = cc.find(t)
                if r not in cls_val:
                    n = counter.get(t.sort, 0)
                    cls_val[r] = n
                    counter[t.sort] = n + 1

        def tval(t):
            if t.is_arith:
                try:
                    return la.lin_value(LinTerm.of_term(t), values)
                except KeyError:
                    return cls_val.get(cc.find(t), Fraction(0)) if t in cc.parent else Fraction(0)
            if t in cc.parent:
                return cls_val[cc.find(t)]
            return 0

        m = L.Model()
        for t in self.all_terms:
            if t.kind == "var":
                m.values[t] = tval(t)
        for v, a in enumerate(self.atoms):
            if isinstance(a, L.BoolAtom):
                m.values[a.var] = bool(self.vals[v])
        for t in apps:
            key = tuple(tval(a) for a in t.args)
            table = m.funcs.setdefault(t.name, {})
            res = tval(t)
            if key in table and table[key] != res:
                raise SolverError(f"function table clash for {t!r}")
            table[key] = res
        for name, sig in self.problem.signature.items():
            if sig[0]:
                m.sorts[name] = sig
        return m

    # -- main loop --------------------------------------------------------
    def solve(self):
        try:
            for origin, clauses in (("A", self.problem.clauses_a), ("B", self.problem.clauses_b)):
                for c in clauses:
                    self.pending.append(P.input_leaf(c, origin))
            while True:
                confl = self.flush()
                if confl is None:
                    confl = self.propagate()
                if confl is None and not self.pending:
                    confl = self.theory_check()
                if confl is not None:
                    self.stats.conflicts += 1
                    self._charge()
                    self.analyze(confl)
                    continue
                if self.pending:
                    continue
                if all(v is not None for v in self.vals):
                    if self.final_check() == "sat":
                        m = self.build_model()
                        if self.cfg.check_model:
                            self._verify_model(m)
                        return Sat(m)
                    continue
                self.decide()
        except _Unsat as u:
            return Unsat(u.root)

    def _verify_model(self, m: L.Model):
        for c in list(self.problem.clauses_a) + list(self.problem.clauses_b):
            if not any(L.eval_literal(l, m) for l in c):
                raise SolverError(f"model violates input clause {c!r}")


def solve(problem, config: SolverConfig | None = None):
    """Sat(model) or Unsat(proof root); raises ResourceLimit when over budget."""
    return Solver(problem, config).solve()
