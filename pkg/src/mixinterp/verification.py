"""Craig-condition checks, floor-division elimination and a bounded brute-force oracle."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import logic as L
from .logic import Formula, LinTerm, Term


# ---------------------------------------------------------------------------
# Floor division


def _floordivs(f: Formula) -> list[Term]:
    seen: dict = {}
    for t in L.formula_terms(f):
        L.subterms(t, seen)
    return [t for t in seen if t.kind == "floordiv"]


def encode_floor_div_parts(f: Formula, prefix: str = "@d", table: dict | None = None):
    """Replace floor-division terms by integer variables.

    Returns (formula, side constraints for the terms met here, table); the table
    maps floordiv terms to their variables and may be shared across calls so
    that equal terms get equal variables.
    """
    table = {} if table is None else table
    divs = _floordivs(f)
    if not divs:
        return f, L.TRUE, table
    side = []
    for d in divs:  # post-order: inner divisions first
        if d.k < 1:
            raise L.LogicError(f"floor division by {d.k}")
        var = table.get(d)
        if var is None:
            var = L.mk_var(f"{prefix}{len(table)}", L.INT)
            table[d] = var
        arg = LinTerm.of_term(L.subst_term(d.args[0], table))
        scaled = LinTerm.of_term(var).scale(d.k)
        side.append(L.le(scaled, arg, L.INT))
        side.append(L.le(arg, scaled.add_const(d.k - 1), L.INT))
    return L.substitute(f, table), L.mk_and(*side), table


def encode_floor_div(f: Formula, prefix: str = "@d") -> Formula:
    """Equisatisfiable floordiv-free formula."""
    g, side, _ = encode_floor_div_parts(f, prefix)
    return L.mk_and(g, side)


def decode_floor_div(f: Formula, table: dict) -> Formula:
    """Put the floordiv terms back in place of their variables."""
    if not table:
        return f
    return L.substitute(f, {v: d for d, v in table.items()})


# ---------------------------------------------------------------------------
# Bounded oracle


@dataclass
class OracleConfig:
    bound: int = 8
    denominator: int = 2
    codomain: int = 3
    max_nodes: int = 200_000

    def __post_init__(self):
        if min(self.bound, self.denominator, self.codomain, self.max_nodes) < 1:
            raise ValueError("oracle bounds must be at least 1")


@dataclass
class OracleSat:
    model: L.Model


@dataclass
class OracleUnsat:
    pass


@dataclass
class OutOfBudget:
    nodes: int


class _Budget(Exception):
    pass


def _domain(sort: str, cfg: OracleConfig) -> list:
    if sort == L.BOOL:
        return [False, True]
    if sort == L.INT:
        out = [0]
        for n in range(1, cfg.bound + 1):
            out += [n, -n]
        return out
    if sort == L.REAL:
        vals = {}
        for d in range(1, cfg.denominator + 1):
            for n in range(-cfg.bound * d, cfg.bound * d + 1):
                vals.setdefault(Fraction(n, d), None)
        return sorted(vals, key=lambda q: (q.denominator, abs(q), q < 0))
    return list(range(cfg.codomain))


def _num(c: Fraction):
    return c.numerator if c.denominator == 1 else c


class _Partial:
    """Three-valued evaluation under a partial assignment (None = unknown)."""

    def __init__(self, values, funcs):
        self.values = values
        self.funcs = funcs
        self._lins: dict = {}

    def term(self, t: Term):
        k = t.kind
        if k == "var":
            return self.values.get(t)
        if k == "num":
            return _num(t.value)
        if k == "app":
            args = []
            for a in t.args:
                v = self.term(a)
                if v is None:
                    return None
                args.append(v)
            table = self.funcs.get(t.name)
            return None if table is None else table.get(tuple(args))
        if k == "affine":
            return self.lin(t.lin)
        if k == "floordiv":
            v = self.term(t.args[0])
            return None if v is None else math.floor(v / t.k) if isinstance(v, Fraction) else v // t.k
        raise L.LogicError(k)

    def lin(self, lin: LinTerm):
        compiled = self._lins.get(id(lin))
        if compiled is None:
            compiled = ([(u, _num(c)) for u, c in lin.coeffs], _num(lin.const), lin)
            self._lins[id(lin)] = compiled
        acc = compiled[1]
        for u, c in compiled[0]:
            v = self.term(u)
            if v is None:
                return None
            acc += c * v
        return acc

    def atom(self, a):
        if isinstance(a, L.LAAtom):
            v = self.lin(a.lhs)
            if v is None:
                return None
            return v < a.bound.real if a.bound.eps < 0 else v <= a.bound.real
        if isinstance(a, L.EqAtom):
            u = self.term(a.lhs)
            if u is None:
                return None
            w = self.term(a.rhs)
            return None if w is None else u == w
        return self.values.get(a.var)

    def formula(self, f: Formula):
        if isinstance(f, L.Lit):
            v = self.atom(f.lit.atom)
            return None if v is None else v == f.lit.pol
        if isinstance(f, L.And):
            res = True
            for g in f.args:
                v = self.formula(g)
                if v is False:
                    return False
                if v is None:
                    res = None
            return res
        if isinstance(f, L.Or):
            res = False
            for g in f.args:
                v = self.formula(g)
                if v is True:
                    return True
                if v is None:
                    res = None
            return res
        if isinstance(f, L.Const):
            return f.value
        raise L.LogicError(f"unexpected pattern node {f!r}")


def _unit_filters(f: Formula) -> dict:
    """Single-variable top-level literals, used to shrink domains up front."""
    conj = f.args if isinstance(f, L.And) else (f,)
    out: dict = {}
    for g in conj:
        if isinstance(g, L.Lit) and isinstance(g.lit.atom, L.LAAtom):
            terms = g.lit.atom.lhs.terms()
            if len(terms) == 1 and terms[0].kind == "var":
                out.setdefault(terms[0], []).append(g)
    return out


def _order(variables: list, f: Formula) -> list:
    """Greedy order that completes as many atoms as possible early."""
    atom_vars = []
    for a in L.formula_atoms(f):
        vs: set = set()
        for t in (a.terms() if not isinstance(a, L.BoolAtom) else [a.var]):
            vs |= {u for u in L.subterms(t) if u.kind == "var"}
        atom_vars.append(vs)
    chosen: list = []
    done: set = set()
    rest = list(variables)
    while rest:
        def score(v):
            closes = sum(1 for vs in atom_vars if v in vs and vs <= done | {v})
            touches = sum(1 for vs in atom_vars if v in vs)
            return (closes, touches, -v.idx)

        best = max(rest, key=score)
        chosen.append(best)
        done.add(best)
        rest.remove(best)
    return chosen


def bounded_oracle(f: Formula, cfg: OracleConfig | None = None):
    """Search for a model with values inside the configured bounds."""
    cfg = cfg or OracleConfig()
    f = L.expand_patterns(f)
    terms: dict = {}
    for t in L.formula_terms(f):
        L.subterms(t, terms)
    for a in L.formula_atoms(f):
        if isinstance(a, L.BoolAtom):
            terms.setdefault(a.var, None)
    variables = sorted((t for t in terms if t.kind == "var"), key=lambda t: t.idx)
    apps = sorted((t for t in terms if t.kind == "app"), key=lambda t: t.idx)
    values: dict = {}
    funcs: dict = {}
    ev = _Partial(values, funcs)
    filters = _unit_filters(f)
    domains = {}
    for v in variables:
        dom = _domain(v.sort, cfg)
        for g in filters.get(v, ()):
            keep = []
            for val in dom:
                values[v] = val
                if ev.formula(g) is not False:
                    keep.append(val)
            values.pop(v, None)
            dom = keep
        domains[v] = dom
    nodes = [0]

    variables = _order(variables, f)

    def next_slot():
        for t in apps:
            key = tuple(ev.term(a) for a in t.args)
            if None not in key and key not in funcs.get(t.name, {}):
                return ("app", t, key)
        for v in variables:
            if v not in values:
                return ("var", v, None)
        return None

    def dfs():
        nodes[0] += 1
        if nodes[0] > cfg.max_nodes:
            raise _Budget
        v = ev.formula(f)
        if v is False:
            return False
        slot = next_slot()
        if slot is None:
            return v is True
        kind, t, key = slot
        dom = domains[t] if kind == "var" else _domain(t.sort, cfg)
        for val in dom:
            if kind == "var":
                values[t] = val
            else:
                funcs.setdefault(t.name, {})[key] = val
            if dfs():
                return True
            if kind == "var":
                del values[t]
            else:
                del funcs[t.name][key]
        return False

    try:
        found = dfs()
    except _Budget:
        return OutOfBudget(nodes[0])
    if not found:
        return OracleUnsat()

    def back(v, sort):
        return Fraction(v) if sort in L.ARITH else v

    sorts = {t.name: (tuple(a.sort for a in t.args), t.sort) for t in apps}
    model_values = {t: back(v, t.sort) for t, v in values.items()}
    model_funcs = {}
    for t in apps:
        table = funcs.get(t.name, {})
        model_funcs[t.name] = {
            tuple(back(x, a.sort) for x, a in zip(k, t.args)): back(v, t.sort) for k, v in table.items()
        }
    return OracleSat(L.Model(model_values, model_funcs, sorts))


def equivalent_within(f: Formula, g: Formula, cfg: OracleConfig | None = None):
    """True / False (with OracleSat witness) / None when out of budget."""
    res = bounded_oracle(L.mk_xor(L.expand_patterns(f), L.expand_patterns(g)), cfg)
    if isinstance(res, OracleUnsat):
        return True
    if isinstance(res, OutOfBudget):
        return None
    return False


# ---------------------------------------------------------------------------
# Craig conditions


PASS, FAIL, UNKNOWN = "pass", "fail", "unknown"


@dataclass
class Condition:
    status: str
    method: str
    witness: object = None
    note: str = ""

    @property
    def ok(self) -> bool:
        return self.status == PASS


@dataclass
class CheckReport:
    inductive: Condition
    contradictory: Condition
    symbols: Condition

    @property
    def passed(self) -> bool:
        return self.inductive.ok and self.contradictory.ok and self.symbols.ok

    @property
    def unknown(self) -> bool:
        return UNKNOWN in (self.inductive.status, self.contradictory.status, self.symbols.status)

    def lines(self) -> list[str]:
        from .printer import model_str

        out = []
        for name, c in (("inductive", self.inductive), ("contradictory", self.contradictory), ("symbols", self.symbols)):
            line = f"check {name}: {c.status} ({c.method})"
            if c.note:
                line += f" {c.note}"
            out.append(line)
            if c.status == FAIL and isinstance(c.witness, L.Model):
                out.append(model_str(c.witness).rstrip("\n"))
            elif c.status == FAIL and c.witness:
                out.append("offending symbols: " + " ".join(sorted(c.witness)))
        return out


class OracleDisagreement(AssertionError):
    pass


def check_unsat(f: Formula, sort: str = L.INT, oracle: OracleConfig | None = None, budget: int = 100_000,
                seed: int = 0) -> Condition:
    """PASS when f is unsatisfiable; the oracle, if given, cross-checks the solver."""
    from .frontend import build_problem
    from .sat import ResourceLimit, Sat, SolverConfig, solve

    problem = build_problem(f, L.TRUE, sort)
    try:
        res = solve(problem, SolverConfig(budget=budget, seed=seed, extended_branches=True, max_branches=budget))
    except ResourceLimit as e:
        res = None
        note = str(e)
    method = "selfSolve"
    if oracle is not None:
        o = bounded_oracle(f, oracle)
        if isinstance(o, OracleSat):
            if res is not None and not isinstance(res, Sat):
                raise OracleDisagreement(f"solver reports unsat but the oracle found a model for {f!r}")
            return Condition(FAIL, "boundedOracle", o.model)
        if isinstance(o, OracleUnsat):
            method = "selfSolve+boundedOracle"
    if res is None:
        return Condition(UNKNOWN, method, note=note)
    if isinstance(res, Sat):
        model = res.model
        try:
            if not L.evaluate(f, model):
                raise OracleDisagreement("solver model does not satisfy the formula")
        except L.UnassignedSymbol:
            pass
        return Condition(FAIL, "selfSolve", model)
    return Condition(PASS, method)


def check_interpolant(
    a: Formula,
    b: Formula,
    interpolant: Formula,
    partition,
    sort: str = L.INT,
    oracle: OracleConfig | None = OracleConfig(),
    budget: int = 100_000,
    seed: int = 0,
) -> CheckReport:
    """Check A |= I, B & I unsat and the symbol condition."""
    i = L.expand_patterns(interpolant)
    inductive = check_unsat(L.mk_and(a, L.mk_not(i)), sort, oracle, budget, seed)
    contradictory = check_unsat(L.mk_and(b, i), sort, oracle, budget, seed)
    shared = partition.shared() - set(partition.aux)
    bad = sorted(s for s in L.formula_symbols(i) if s not in shared)
    symbols = Condition(FAIL, "syntactic", set(bad)) if bad else Condition(PASS, "syntactic")
    return CheckReport(inductive, contradictory, symbols)
