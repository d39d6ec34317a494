"""Terms, exact arithmetic, normalized literals and NNF formulas."""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

INT = "Int"
REAL = "Real"
BOOL = "Bool"
ARITH = (INT, REAL)


class LogicError(Exception):
    pass


class SortError(LogicError):
    pass


class UnassignedSymbol(LogicError):
    pass


# ---------------------------------------------------------------------------
# Q_eps constants


@dataclass(frozen=True, order=True)
class EpsRational:
    """A value ``real + eps * epsilon`` compared lexicographically."""

    real: Fraction
    eps: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "real", Fraction(self.real))
        object.__setattr__(self, "eps", Fraction(self.eps))

    def __add__(self, other: "EpsRational") -> "EpsRational":
        return EpsRational(self.real + other.real, self.eps + other.eps)

    def __sub__(self, other: "EpsRational") -> "EpsRational":
        return EpsRational(self.real - other.real, self.eps - other.eps)

    def __neg__(self) -> "EpsRational":
        return EpsRational(-self.real, -self.eps)

    def scale(self, c) -> "EpsRational":
        return EpsRational(self.real * c, self.eps * c)

    def is_zero(self) -> bool:
        return self.real == 0 and self.eps == 0

    def __str__(self):
        if self.eps == 0:
            return str(self.real)
        sign = "+" if self.eps > 0 else "-"
        mag = abs(self.eps)
        return f"{self.real}{sign}{'' if mag == 1 else mag}eps"


ZERO = EpsRational(Fraction(0))
NEG_EPS = EpsRational(Fraction(0), Fraction(-1))


# ---------------------------------------------------------------------------
# Terms (hash-consed; identity equality)

_lock = threading.Lock()
_table: dict = {}
_counter = [0]


def _intern(cls, key, build):
    obj = _table.get(key)
    if obj is not None:
        return obj
    with _lock:
        obj = _table.get(key)
        if obj is None:
            obj = build()
            object.__setattr__(obj, "idx", _counter[0])
            _counter[0] += 1
            _table[key] = obj
    return obj


class Term:
    __slots__ = ("kind", "name", "args", "lin", "value", "k", "sort", "idx", "_hash")

    def __init__(self, kind, name, args, lin, value, k, sort):
        self.kind = kind
        self.name = name
        self.args = args
        self.lin = lin
        self.value = value
        self.k = k
        self.sort = sort
        self._hash = None

    def __setattr__(self, key, value):
        if key in ("idx",) or not hasattr(self, "_hash") or key == "_hash":
            object.__setattr__(self, key, value)
        else:
            raise AttributeError("terms are immutable")

    def __hash__(self):
        return id(self)

    def __eq__(self, other):
        return self is other

    def __lt__(self, other):
        return self.idx < other.idx

    def __repr__(self):
        from .printer import term_str

        return term_str(self)

    @property
    def is_arith(self) -> bool:
        return self.sort in ARITH


def mk_var(name: str, sort: str) -> Term:
    # the sort is part of the identity: separate problems may reuse a name
    key = ("var", name, sort)
    return _intern(Term, key, lambda: Term("var", name, (), None, None, None, sort))


def mk_app(fn: str, args: Iterable[Term], sort: str) -> Term:
    args = tuple(args)
    if not args:
        return mk_var(fn, sort)
    key = ("app", fn, tuple(a.idx for a in args), sort)
    return _intern(Term, key, lambda: Term("app", fn, args, None, None, None, sort))


def mk_num(value, sort: str = INT) -> Term:
    value = Fraction(value)
    if sort == INT and value.denominator != 1:
        raise SortError(f"non-integral Int numeral {value}")
    key = ("num", value, sort)
    return _intern(Term, key, lambda: Term("num", None, (), None, value, None, sort))


def mk_floordiv(arg: Term, k: int) -> Term:
    """The term floor(arg / k) over Int."""
    if arg.sort != INT:
        raise SortError("floor division only at Int sort")
    if int(k) != k or k < 1:
        raise LogicError(f"floor division by {k}")
    k = int(k)
    if k == 1:
        return arg
    if arg.kind == "num":
        return mk_num(math.floor(arg.value / k), INT)
    key = ("floordiv", arg.idx, k)
    return _intern(Term, key, lambda: Term("floordiv", None, (arg,), None, None, k, INT))


def mk_affine(lin: "LinTerm", sort: str) -> Term:
    """Canonical term for a linear combination."""
    if sort not in ARITH:
        raise SortError(f"affine term at sort {sort}")
    if not lin.coeffs:
        return mk_num(lin.const, sort)
    if lin.const == 0 and len(lin.coeffs) == 1 and lin.coeffs[0][1] == 1:
        return lin.coeffs[0][0]
    for t, c in lin.coeffs:
        if t.sort != sort:
            raise SortError(f"mixed sorts in linear term ({t.sort} vs {sort})")
    if sort == INT and (lin.const.denominator != 1 or any(c.denominator != 1 for _, c in lin.coeffs)):
        raise SortError("non-integral coefficient at Int sort")
    key = ("affine", lin.key(), sort)
    return _intern(Term, key, lambda: Term("affine", None, (), lin, None, None, sort))


# ---------------------------------------------------------------------------
# Linear terms


class LinTerm:
    """Sum of coefficient * atomic term plus a constant; never stores zeros."""

    __slots__ = ("coeffs", "const", "_key")

    def __init__(self, coeffs: Mapping[Term, Fraction] | Iterable = (), const=0):
        if isinstance(coeffs, Mapping):
            items = coeffs.items()
        else:
            items = coeffs
        acc: dict[Term, Fraction] = {}
        for t, c in items:
            c = Fraction(c)
            if c:
                acc[t] = acc.get(t, Fraction(0)) + c
        self.coeffs = tuple(sorted(((t, c) for t, c in acc.items() if c), key=lambda tc: tc[0].idx))
        self.const = Fraction(const)
        self._key = None

    @staticmethod
    def of_term(t: Term) -> "LinTerm":
        if t.kind == "num":
            return LinTerm((), t.value)
        if t.kind == "affine":
            return t.lin
        return LinTerm(((t, 1),))

    @staticmethod
    def const_of(c) -> "LinTerm":
        return LinTerm((), c)

    def key(self):
        if self._key is None:
            self._key = (tuple((t.idx, c) for t, c in self.coeffs), self.const)
        return self._key

    def __eq__(self, other):
        return isinstance(other, LinTerm) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __add__(self, other: "LinTerm") -> "LinTerm":
        return LinTerm(list(self.coeffs) + list(other.coeffs), self.const + other.const)

    def __sub__(self, other: "LinTerm") -> "LinTerm":
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c) -> "LinTerm":
        c = Fraction(c)
        if c == 0:
            return LinTerm()
        return LinTerm([(t, a * c) for t, a in self.coeffs], self.const * c)

    def add_const(self, c) -> "LinTerm":
        return LinTerm(self.coeffs, self.const + c)

    def without_const(self) -> "LinTerm":
        return LinTerm(self.coeffs, 0)

    def coeff(self, t: Term) -> Fraction:
        for u, c in self.coeffs:
            if u is t:
                return c
        return Fraction(0)

    def drop(self, t: Term) -> "LinTerm":
        return LinTerm([(u, c) for u, c in self.coeffs if u is not t], self.const)

    def terms(self) -> list[Term]:
        return [t for t, _ in self.coeffs]

    def is_const(self) -> bool:
        return not self.coeffs

    def map_terms(self, fn) -> "LinTerm":
        out = LinTerm((), self.const)
        for t, c in self.coeffs:
            out = out + LinTerm.of_term(fn(t)).scale(c)
        return out

    def __repr__(self):
        from .printer import lin_str

        return lin_str(self)


# ---------------------------------------------------------------------------
# Atoms and literals


class Atom:
    __slots__ = ("idx",)

    def __hash__(self):
        return id(self)

    def __eq__(self, other):
        return self is other


class LAAtom(Atom):
    """lhs <= bound, lhs has zero constant and positive leading coefficient."""

    __slots__ = ("lhs", "bound", "sort")

    def __init__(self, lhs, bound, sort):
        self.lhs = lhs
        self.bound = bound
        self.sort = sort

    def terms(self):
        return self.lhs.terms()

    def __repr__(self):
        from .printer import atom_str

        return atom_str(self)


class EqAtom(Atom):
    __slots__ = ("lhs", "rhs")

    def __init__(self, lhs, rhs):
        self.lhs = lhs
        self.rhs = rhs

    @property
    def sort(self):
        return self.lhs.sort

    def terms(self):
        return [self.lhs, self.rhs]

    def __repr__(self):
        from .printer import atom_str

        return atom_str(self)


class BoolAtom(Atom):
    __slots__ = ("var",)

    def __init__(self, var):
        self.var = var

    def terms(self):
        return [self.var]

    def __repr__(self):
        return self.var.name


def la_atom(lhs: LinTerm, bound: EpsRational, sort: str) -> LAAtom:
    key = ("la", lhs.key(), bound, sort)
    return _intern(LAAtom, key, lambda: LAAtom(lhs, bound, sort))


def eq_atom(t: Term, u: Term) -> EqAtom:
    if u.idx < t.idx:
        t, u = u, t
    key = ("eq", t.idx, u.idx)
    return _intern(EqAtom, key, lambda: EqAtom(t, u))


def bool_atom(v: Term) -> BoolAtom:
    if v.sort != BOOL:
        raise SortError(f"{v.name} is not Boolean")
    key = ("bool", v.idx)
    return _intern(BoolAtom, key, lambda: BoolAtom(v))


@dataclass(frozen=True)
class Literal:
    atom: Atom
    pol: bool = True

    def __neg__(self) -> "Literal":
        return Literal(self.atom, not self.pol)

    def sort_key(self):
        return (self.atom.idx, not self.pol)

    def __repr__(self):
        from .printer import literal_str

        return literal_str(self)


def negate_literal(lit: Literal) -> Literal:
    return -lit


def materialize(lit: Literal) -> tuple[LinTerm, EpsRational]:
    """The inequality ``lhs <= bound`` denoted by an arithmetic literal."""
    atom = lit.atom
    if not isinstance(atom, LAAtom):
        raise LogicError("not an inequality literal")
    if lit.pol:
        return atom.lhs, atom.bound
    if atom.sort == INT:
        return -atom.lhs, EpsRational(-atom.bound.real - 1)
    return -atom.lhs, EpsRational(-atom.bound.real, -atom.bound.eps - 1)


def clause_key(lits: Iterable[Literal]) -> tuple:
    return tuple(sorted(set(lits), key=Literal.sort_key))


class Clause(tuple):
    """Duplicate-free, deterministically ordered disjunction of literals."""

    def __new__(cls, lits: Iterable[Literal] = ()):
        return super().__new__(cls, clause_key(lits))

    def is_tautology(self) -> bool:
        s = set(self)
        return any(-l in s for l in self)

    def __repr__(self):
        return "(" + " ".join(repr(l) for l in self) + ")"


# ---------------------------------------------------------------------------
# Formulas (NNF) and pattern nodes


class Formula:
    __slots__ = ()

    def aux(self) -> frozenset:
        return frozenset()


@dataclass(frozen=True)
class Const(Formula):
    value: bool

    def __repr__(self):
        return "true" if self.value else "false"


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Lit(Formula):
    lit: Literal

    def __repr__(self):
        return repr(self.lit)


@dataclass(frozen=True)
class And(Formula):
    args: tuple

    def __repr__(self):
        return "(and " + " ".join(map(repr, self.args)) + ")"


@dataclass(frozen=True)
class Or(Formula):
    args: tuple

    def __repr__(self):
        return "(or " + " ".join(map(repr, self.args)) + ")"


@dataclass(frozen=True)
class EQ(Formula):
    """Pattern node denoting (p xor x = s)."""

    x: Term
    p: Term
    s: Term

    def __repr__(self):
        return f"EQ({self.x!r}, {self.s!r})"


@dataclass(frozen=True)
class LA(Formula):
    """Pattern node LA(s, k, F); denotes F."""

    s: LinTerm
    k: EpsRational
    f: Formula
    sort: str

    def __repr__(self):
        return f"LA({self.s!r}, {self.k}, {self.f!r})"


def mk_and(*fs: Formula) -> Formula:
    out: list[Formula] = []
    seen = set()
    for f in fs:
        parts = f.args if isinstance(f, And) else (f,)
        for g in parts:
            if g is TRUE or g == TRUE:
                continue
            if g == FALSE:
                return FALSE
            if g not in seen:
                seen.add(g)
                out.append(g)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return And(tuple(out))


def mk_or(*fs: Formula) -> Formula:
    out: list[Formula] = []
    seen = set()
    for f in fs:
        parts = f.args if isinstance(f, Or) else (f,)
        for g in parts:
            if g == FALSE:
                continue
            if g == TRUE:
                return TRUE
            if g not in seen:
                seen.add(g)
                out.append(g)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


def mk_lit(lit) -> Formula:
    if isinstance(lit, bool):
        return TRUE if lit else FALSE
    if isinstance(lit, Formula):
        return lit
    return Lit(lit)


def mk_not(f: Formula) -> Formula:
    if isinstance(f, Const):
        return FALSE if f.value else TRUE
    if isinstance(f, Lit):
        return Lit(-f.lit)
    if isinstance(f, And):
        return mk_or(*(mk_not(g) for g in f.args))
    if isinstance(f, Or):
        return mk_and(*(mk_not(g) for g in f.args))
    raise LogicError(f"cannot negate pattern node {f!r}")


def mk_implies(a: Formula, b: Formula) -> Formula:
    return mk_or(mk_not(a), b)


def mk_xor(a: Formula, b: Formula) -> Formula:
    return mk_or(mk_and(a, mk_not(b)), mk_and(mk_not(a), b))


def mk_iff(a: Formula, b: Formula) -> Formula:
    return mk_or(mk_and(a, b), mk_and(mk_not(a), mk_not(b)))


# ---------------------------------------------------------------------------
# Atom normalization


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def le(lhs: LinTerm, rhs: LinTerm, sort: str, strict: bool = False) -> Formula:
    """Normalized formula for ``lhs <= rhs`` (``<`` when strict)."""
    diff = lhs - rhs
    s = diff.without_const()
    b = -diff.const
    for t in s.terms():
        if t.sort != sort:
            raise SortError(f"term {t!r} has sort {t.sort}, expected {sort}")
    if s.is_const():
        holds = 0 < b if strict else 0 <= b
        return TRUE if holds else FALSE
    if sort == INT:
        mult = 1
        for _, c in s.coeffs:
            mult = _lcm(mult, c.denominator)
        s = s.scale(mult)
        b = b * mult
        g = 0
        for _, c in s.coeffs:
            g = math.gcd(g, int(c))
        s = s.scale(Fraction(1, g))
        b = b / g
        bound = math.ceil(b) - 1 if strict else math.floor(b)
        if s.coeffs[0][1] > 0:
            return Lit(Literal(la_atom(s, EpsRational(bound), INT), True))
        return Lit(Literal(la_atom(-s, EpsRational(-bound - 1), INT), False))
    lead = s.coeffs[0][1]
    s = s.scale(1 / abs(lead))
    b = b / abs(lead)
    e = -1 if strict else 0
    if lead > 0:
        return Lit(Literal(la_atom(s, EpsRational(b, e), REAL), True))
    return Lit(Literal(la_atom(-s, EpsRational(-b, -e - 1), REAL), False))


def lin_sort(*lins: LinTerm, default: str | None = None) -> str:
    sorts = {t.sort for lin in lins for t in lin.terms()}
    if len(sorts) > 1:
        raise SortError(f"mixed sorts {sorted(sorts)}")
    if sorts:
        return sorts.pop()
    if default is None:
        raise SortError("cannot infer sort of constant comparison")
    return default


def mk_eq(t: Term, u: Term) -> Formula:
    if t.sort != u.sort:
        raise SortError(f"equality between sorts {t.sort} and {u.sort}")
    if t is u:
        return TRUE
    if t.sort == BOOL:
        return mk_iff(bool_formula(t), bool_formula(u))
    if t.is_arith:
        d = LinTerm.of_term(t) - LinTerm.of_term(u)
        if d.is_const():
            return TRUE if d.const == 0 else FALSE
    return Lit(Literal(eq_atom(t, u), True))


def bool_formula(v: Term) -> Formula:
    if v.kind != "var":
        raise SortError("Boolean terms must be variables")
    return Lit(Literal(bool_atom(v), True))


_REL = {"<=", "<", ">=", ">", "=", "!="}


def normalize_atom(lhs: LinTerm, rel: str, rhs: LinTerm, sort: str) -> Literal | bool:
    """Canonical literal for ``lhs rel rhs``; constant comparisons fold to bool."""
    if rel not in _REL:
        raise LogicError(f"unknown relation {rel}")
    lin_sort(lhs, rhs, default=sort)
    if lin_sort(lhs, rhs, default=sort) != sort:
        raise SortError("mixed-sort input")
    if rel in ("=", "!="):
        f = mk_eq(mk_affine(lhs, sort), mk_affine(rhs, sort))
        if rel == "!=":
            f = mk_not(f)
    elif rel == "<=":
        f = le(lhs, rhs, sort)
    elif rel == "<":
        f = le(lhs, rhs, sort, strict=True)
    elif rel == ">=":
        f = le(rhs, lhs, sort)
    else:
        f = le(rhs, lhs, sort, strict=True)
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Lit):
        return f.lit
    raise LogicError("unexpected compound atom")


def literal_formula(lit: Literal) -> Formula:
    return Lit(lit)


# ---------------------------------------------------------------------------
# Symbols


def term_symbols(t: Term, out: set | None = None) -> set:
    """Non-theory symbols (variable and function names) of a term."""
    if out is None:
        out = set()
    stack = [t]
    while stack:
        u = stack.pop()
        if u.kind == "var":
            out.add(u.name)
        elif u.kind == "app":
            out.add(u.name)
            stack.extend(u.args)
        elif u.kind == "affine":
            stack.extend(u.lin.terms())
        elif u.kind == "floordiv":
            stack.extend(u.args)
    return out


def atom_terms(atom: Atom) -> list[Term]:
    return atom.terms()


def atom_symbols(atom: Atom) -> set:
    out: set = set()
    for t in atom.terms():
        term_symbols(t, out)
    return out


def formula_atoms(f: Formula, out: list | None = None) -> list:
    if out is None:
        out = []
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Lit):
            out.append(g.lit.atom)
        elif isinstance(g, (And, Or)):
            stack.extend(reversed(g.args))
        elif isinstance(g, LA):
            stack.append(g.f)
    return out


def formula_terms(f: Formula) -> list[Term]:
    out = []
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Lit):
            out.extend(g.lit.atom.terms())
        elif isinstance(g, (And, Or)):
            stack.extend(reversed(g.args))
        elif isinstance(g, LA):
            out.extend(g.s.terms())
            stack.append(g.f)
        elif isinstance(g, EQ):
            out.extend([g.x, g.p, g.s])
    return out


def formula_symbols(f: Formula) -> set:
    out: set = set()
    for t in formula_terms(f):
        term_symbols(t, out)
    return out


def subterms(t: Term, out: dict | None = None) -> dict:
    """All sub-terms in post-order (children first)."""
    if out is None:
        out = {}
    stack = [(t, False)]
    while stack:
        u, done = stack.pop()
        if u in out:
            continue
        if done:
            out[u] = None
            continue
        stack.append((u, True))
        if u.kind in ("app", "floordiv"):
            for a in reversed(u.args):
                stack.append((a, False))
        elif u.kind == "affine":
            for a in reversed(u.lin.terms()):
                stack.append((a, False))
    return out


# ---------------------------------------------------------------------------
# Substitution


def subst_term(t: Term, bindings: Mapping[Term, Term], cache: dict | None = None) -> Term:
    if cache is None:
        cache = {}
    if t in cache:
        return cache[t]
    if t in bindings:
        r = bindings[t]
    elif t.kind in ("var", "num"):
        r = t
    elif t.kind == "app":
        args = tuple(subst_term(a, bindings, cache) for a in t.args)
        r = mk_app(t.name, args, t.sort)
    elif t.kind == "affine":
        r = mk_affine(subst_lin(t.lin, bindings, cache), t.sort)
    elif t.kind == "floordiv":
        r = mk_floordiv(subst_term(t.args[0], bindings, cache), t.k)
    else:  # pragma: no cover
        raise LogicError(t.kind)
    cache[t] = r
    return r


def subst_lin(lin: LinTerm, bindings: Mapping[Term, Term], cache: dict | None = None) -> LinTerm:
    if cache is None:
        cache = {}
    return lin.map_terms(lambda u: subst_term(u, bindings, cache))


def subst_literal(lit: Literal, bindings: Mapping[Term, Term], cache: dict | None = None) -> Formula:
    if cache is None:
        cache = {}
    atom = lit.atom
    if isinstance(atom, LAAtom):
        lhs = subst_lin(atom.lhs, bindings, cache)
        if lhs == atom.lhs:
            return Lit(lit)
        f = le(lhs, LinTerm.const_of(0).add_const(atom.bound.real), atom.sort, strict=atom.bound.eps < 0)
    elif isinstance(atom, EqAtom):
        t = subst_term(atom.lhs, bindings, cache)
        u = subst_term(atom.rhs, bindings, cache)
        if t is atom.lhs and u is atom.rhs:
            return Lit(lit)
        f = mk_eq(t, u)
    else:
        v = bindings.get(atom.var, atom.var)
        if v is atom.var:
            return Lit(lit)
        if v.sort != BOOL:
            raise SortError("Boolean variable bound to non-Boolean term")
        f = bool_formula(v)
    return f if lit.pol else mk_not(f)


def substitute(f: Formula, bindings: Mapping[Term, Term], cache: dict | None = None) -> Formula:
    """Simultaneous substitution of variables by terms, re-normalizing atoms."""
    for v, t in bindings.items():
        if v.sort != t.sort:
            raise SortError(f"cannot bind {v!r}:{v.sort} to {t.sort} term")
    if cache is None:
        cache = {}
    return _subst(f, bindings, cache, {})


def _subst(f, bindings, cache, memo):
    if f in memo:
        return memo[f]
    if isinstance(f, Const):
        r = f
    elif isinstance(f, Lit):
        r = subst_literal(f.lit, bindings, cache)
    elif isinstance(f, And):
        r = mk_and(*(_subst(g, bindings, cache, memo) for g in f.args))
    elif isinstance(f, Or):
        r = mk_or(*(_subst(g, bindings, cache, memo) for g in f.args))
    elif isinstance(f, EQ):
        x = subst_term(f.x, bindings, cache)
        p = subst_term(f.p, bindings, cache)
        s = subst_term(f.s, bindings, cache)
        r = EQ(x, p, s)
    elif isinstance(f, LA):
        r = mk_la(subst_lin(f.s, bindings, cache), f.k, _subst(f.f, bindings, cache, memo), f.sort)
    else:  # pragma: no cover
        raise LogicError(f"unknown formula {f!r}")
    memo[f] = r
    return r


def mk_la(s: LinTerm, k: EpsRational, f: Formula, sort: str) -> Formula:
    """LA pattern node; constant F collapses to the constant."""
    if isinstance(f, Const):
        return f
    return LA(s, k, f, sort)


def expand_patterns(f: Formula) -> Formula:
    """Replace EQ and LA nodes by the plain formulas they denote."""
    if isinstance(f, (Const, Lit)):
        return f
    if isinstance(f, And):
        return mk_and(*(expand_patterns(g) for g in f.args))
    if isinstance(f, Or):
        return mk_or(*(expand_patterns(g) for g in f.args))
    if isinstance(f, LA):
        return expand_patterns(f.f)
    if isinstance(f, EQ):
        return mk_xor(bool_formula(f.p), mk_eq(f.x, f.s))
    raise LogicError(f"unknown formula {f!r}")


# ---------------------------------------------------------------------------
# Models and evaluation


@dataclass
class Model:
    values: dict = field(default_factory=dict)  # variable Term -> value
    funcs: dict = field(default_factory=dict)  # fn name -> {arg tuple: value}
    sorts: dict = field(default_factory=dict)  # fn name -> (arg sorts, result sort)

    def term_value(self, t: Term):
        return eval_term(t, self)

    def __repr__(self):
        from .printer import model_str

        return model_str(self)


def eval_term(t: Term, m: Model, cache: dict | None = None):
    if cache is not None and t in cache:
        return cache[t]
    k = t.kind
    if k == "num":
        v = t.value
    elif k == "var":
        try:
            v = m.values[t]
        except KeyError:
            raise UnassignedSymbol(t.name) from None
    elif k == "app":
        args = tuple(eval_term(a, m, cache) for a in t.args)
        try:
            v = m.funcs[t.name][args]
        except KeyError:
            raise UnassignedSymbol(f"{t.name}{args}") from None
    elif k == "affine":
        v = t.lin.const
        for u, c in t.lin.coeffs:
            v += c * eval_term(u, m, cache)
    elif k == "floordiv":
        v = Fraction(math.floor(Fraction(eval_term(t.args[0], m, cache)) / t.k))
    else:  # pragma: no cover
        raise LogicError(k)
    if cache is not None:
        cache[t] = v
    return v


def eval_lin(lin: LinTerm, m: Model, cache=None) -> Fraction:
    v = lin.const
    for u, c in lin.coeffs:
        v += c * eval_term(u, m, cache)
    return v


def eval_atom(atom: Atom, m: Model, cache=None) -> bool:
    if isinstance(atom, LAAtom):
        return EpsRational(eval_lin(atom.lhs, m, cache)) <= atom.bound
    if isinstance(atom, EqAtom):
        return eval_term(atom.lhs, m, cache) == eval_term(atom.rhs, m, cache)
    try:
        return bool(m.values[atom.var])
    except KeyError:
        raise UnassignedSymbol(atom.var.name) from None


def eval_literal(lit: Literal, m: Model, cache=None) -> bool:
    return eval_atom(lit.atom, m, cache) == lit.pol


def evaluate(f: Formula, m: Model, cache: dict | None = None) -> bool:
    """Truth value of a formula (pattern nodes by their denotation)."""
    if cache is None:
        cache = {}
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Lit):
        return eval_literal(f.lit, m, cache)
    if isinstance(f, And):
        return all(evaluate(g, m, cache) for g in f.args)
    if isinstance(f, Or):
        return any(evaluate(g, m, cache) for g in f.args)
    if isinstance(f, LA):
        return evaluate(f.f, m, cache)
    if isinstance(f, EQ):
        p = bool(m.values[f.p]) if f.p in m.values else None
        if p is None:
            raise UnassignedSymbol(f.p.name)
        return p != (eval_term(f.x, m, cache) == eval_term(f.s, m, cache))
    raise LogicError(f"unknown formula {f!r}")
