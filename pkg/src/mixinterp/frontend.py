"""SMT-LIB subset parser, partition classification and clausification."""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from . import logic as L
from .logic import Formula, LinTerm, Term


class ParseError(Exception):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.msg = msg
        self.line = line
        self.col = col


LOGICS = {"QF_UFLIA": L.INT, "QF_UFLRA": L.REAL}


# ---------------------------------------------------------------------------
# S-expressions


@dataclass(frozen=True)
class Tok:
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Tok]:
    toks: list[Tok] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch.isspace():
            i, col = i + 1, col + 1
            continue
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch in "()":
            toks.append(Tok(ch, line, col))
            i, col = i + 1, col + 1
            continue
        start, scol = i, col
        if ch == "|":
            j = text.find("|", i + 1)
            if j < 0:
                raise ParseError("unterminated quoted symbol", line, col)
            word = text[i + 1 : j]
            toks.append(Tok("|" + word, line, scol))
            line += word.count("\n")
            col += j + 1 - i
            i = j + 1
            continue
        if ch == '"':
            j = text.find('"', i + 1)
            if j < 0:
                raise ParseError("unterminated string", line, col)
            toks.append(Tok(text[i : j + 1], line, scol))
            col += j + 1 - i
            i = j + 1
            continue
        while i < n and not text[i].isspace() and text[i] not in "();":
            i += 1
        col += i - start
        toks.append(Tok(text[start:i], line, scol))
    return toks


def read_sexprs(text: str) -> list:
    toks = tokenize(text)
    out = []
    stack: list[list] = []
    opens: list[Tok] = []
    for tok in toks:
        if tok.text == "(":
            stack.append([])
            opens.append(tok)
        elif tok.text == ")":
            if not stack:
                raise ParseError("unexpected ')'", tok.line, tok.col)
            lst = stack.pop()
            o = opens.pop()
            node = SList(lst, o.line, o.col)
            if stack:
                stack[-1].append(node)
            else:
                out.append(node)
        else:
            if stack:
                stack[-1].append(tok)
            else:
                out.append(tok)
    if stack:
        o = opens[-1]
        raise ParseError("unbalanced '('", o.line, o.col)
    return out


class SList(list):
    def __init__(self, items, line, col):
        super().__init__(items)
        self.line = line
        self.col = col


def _pos(x):
    return (x.line, x.col)


def _err(msg, x) -> ParseError:
    return ParseError(msg, *_pos(x))


def _atom_text(x) -> str | None:
    if isinstance(x, Tok):
        return x.text[1:] if x.text.startswith("|") else x.text
    return None


# ---------------------------------------------------------------------------
# Script


@dataclass
class Script:
    logic: str
    sort: str
    declarations: list = field(default_factory=list)  # (name, arg sorts, result sort)
    assertions: dict = field(default_factory=dict)  # "A"/"B" -> Formula
    sorts: list = field(default_factory=list)
    check_sat: bool = False
    interpolants: tuple | None = None

    def formula(self, name: str) -> Formula:
        return self.assertions.get(name, L.TRUE)

    @property
    def signature(self) -> dict:
        return {n: (tuple(a), r) for n, a, r in self.declarations}


class _Elab:
    """Elaborate S-expressions into terms, linear terms and formulas."""

    def __init__(self, sort: str, decls: dict, user_sorts: set):
        self.sort = sort
        self.decls = decls
        self.user_sorts = user_sorts

    # values are one of: ("term", Term) | ("lin", LinTerm, sort) | ("form", Formula)
    def value(self, x, env):
        if isinstance(x, Tok):
            return self.atom(x, env)
        if not x:
            raise _err("empty expression", x)
        head = _atom_text(x[0])
        if head is None:
            raise _err("unsupported expression head", x)
        if head == "let":
            return self.let(x, env)
        if head == "!":
            raise _err("annotations only allowed at assertion top level", x)
        args = x[1:]
        if head in ("and", "or", "not", "=>", "xor"):
            fs = [self.formula(a, env) for a in args]
            if head == "and":
                return ("form", L.mk_and(*fs))
            if head == "or":
                return ("form", L.mk_or(*fs))
            if head == "not":
                if len(fs) != 1:
                    raise _err("not takes one argument", x)
                return ("form", L.mk_not(fs[0]))
            if head == "xor":
                acc = fs[0]
                for g in fs[1:]:
                    acc = L.mk_xor(acc, g)
                return ("form", acc)
            if len(fs) < 2:
                raise _err("=> takes at least two arguments", x)
            acc = fs[-1]
            for g in reversed(fs[:-1]):
                acc = L.mk_implies(g, acc)
            return ("form", acc)
        if head in ("=", "distinct"):
            vals = [self.value(a, env) for a in args]
            if len(vals) < 2:
                raise _err(f"{head} takes at least two arguments", x)
            if all(v[0] == "form" for v in vals):
                if head == "=":
                    return ("form", L.mk_and(*(L.mk_iff(a[1], b[1]) for a, b in zip(vals, vals[1:]))))
                return ("form", L.mk_and(*(L.mk_xor(a[1], b[1]) for a, b in itertools.combinations(vals, 2))))
            terms = [self.as_term(v, a) for v, a in zip(vals, args)]
            srt = {t.sort for t in terms}
            if len(srt) != 1:
                raise _err("equality between different sorts", x)
            if head == "=":
                return ("form", L.mk_and(*(L.mk_eq(a, b) for a, b in zip(terms, terms[1:]))))
            return ("form", L.mk_and(*(L.mk_not(L.mk_eq(a, b)) for a, b in itertools.combinations(terms, 2))))
        if head in ("<=", "<", ">=", ">"):
            lins = [self.lin(a, env) for a in args]
            if len(lins) < 2:
                raise _err(f"{head} takes at least two arguments", x)
            sort = self._arith_sort(lins, x)
            out = []
            for (a, _), (b, _) in zip(lins, lins[1:]):
                if head == "<=":
                    out.append(L.le(a, b, sort))
                elif head == "<":
                    out.append(L.le(a, b, sort, strict=True))
                elif head == ">=":
                    out.append(L.le(b, a, sort))
                else:
                    out.append(L.le(b, a, sort, strict=True))
            return ("form", L.mk_and(*out))
        if head in ("+", "-", "*", "/", "div"):
            return self.arith(head, x, env)
        if head == "ite":
            raise _err("ite is not supported", x)
        # uninterpreted application
        if head not in self.decls:
            raise _err(f"undeclared symbol {head}", x[0])
        arg_sorts, res = self.decls[head]
        if len(arg_sorts) != len(args):
            raise _err(f"{head} expects {len(arg_sorts)} arguments", x)
        targs = []
        for a, s in zip(args, arg_sorts):
            t = self.as_term(self.value(a, env), a)
            if t.sort != s:
                raise _err(f"argument of {head} has sort {t.sort}, expected {s}", a)
            targs.append(t)
        if res == L.BOOL:
            raise _err("Boolean-valued functions are not supported", x)
        return ("term", L.mk_app(head, targs, res))

    def atom(self, tok: Tok, env):
        text = _atom_text(tok)
        if text in env:
            return env[text]
        if text == "true":
            return ("form", L.TRUE)
        if text == "false":
            return ("form", L.FALSE)
        num = _parse_number(tok.text)
        if num is not None:
            value, is_dec = num
            sort = L.REAL if is_dec else self.sort
            return ("lin", LinTerm.const_of(value), sort)
        if text not in self.decls:
            raise _err(f"undeclared symbol {text}", tok)
        arg_sorts, res = self.decls[text]
        if arg_sorts:
            raise _err(f"{text} expects {len(arg_sorts)} arguments", tok)
        v = L.mk_var(text, res)
        if res == L.BOOL:
            return ("form", L.bool_formula(v))
        return ("term", v)

    def let(self, x, env):
        if len(x) != 3 or isinstance(x[1], Tok):
            raise _err("malformed let", x)
        new_env = dict(env)
        for b in x[1]:
            if isinstance(b, Tok) or len(b) != 2 or _atom_text(b[0]) is None:
                raise _err("malformed let binding", b)
            new_env[_atom_text(b[0])] = self.value(b[1], env)
        return self.value(x[2], new_env)

    def arith(self, head, x, env):
        args = x[1:]
        if not args:
            raise _err(f"{head} needs arguments", x)
        lins = [self.lin(a, env) for a in args]
        sort = self._arith_sort(lins, x)
        if head == "+":
            acc = LinTerm()
            for l, _ in lins:
                acc = acc + l
            return ("lin", acc, sort)
        if head == "-":
            if len(lins) == 1:
                return ("lin", -lins[0][0], sort)
            acc = lins[0][0]
            for l, _ in lins[1:]:
                acc = acc - l
            return ("lin", acc, sort)
        if head == "*":
            acc = lins[0][0]
            for l, _ in lins[1:]:
                if acc.is_const():
                    acc = l.scale(acc.const)
                elif l.is_const():
                    acc = acc.scale(l.const)
                else:
                    raise _err("nonlinear multiplication", x)
            return ("lin", acc, sort)
        if head == "/":
            acc = lins[0][0]
            for l, _ in lins[1:]:
                if not l.is_const() or l.const == 0:
                    raise _err("division only by nonzero constants", x)
                acc = acc.scale(1 / l.const)
            return ("lin", acc, L.REAL)
        # div
        if len(lins) != 2 or not lins[1][0].is_const():
            raise _err("div only by a constant", x)
        k = lins[1][0].const
        if sort != L.INT or k.denominator != 1 or k < 1:
            raise _err("div needs an Int dividend and a positive constant divisor", x)
        return ("term", L.mk_floordiv(L.mk_affine(lins[0][0], L.INT), int(k)))

    def _arith_sort(self, lins, x) -> str:
        sorts = {s for _, s in lins if s is not None}
        if not sorts:
            return self.sort
        if len(sorts) > 1:
            raise _err("mixed Int/Real arithmetic", x)
        return sorts.pop()

    def lin(self, x, env):
        v = self.value(x, env)
        if v[0] == "lin":
            return v[1], (None if v[1].is_const() and v[2] == self.sort else v[2])
        if v[0] == "term":
            t = v[1]
            if not t.is_arith:
                raise _err(f"expected arithmetic term, got sort {t.sort}", x)
            return LinTerm.of_term(t), t.sort
        raise _err("expected a term, got a formula", x)

    def as_term(self, v, x) -> Term:
        if v[0] == "term":
            return v[1]
        if v[0] == "lin":
            return L.mk_affine(v[1], v[2])
        raise _err("Boolean sub-formulas cannot be used as terms", x)

    def formula(self, x, env) -> Formula:
        v = self.value(x, env)
        if v[0] != "form":
            raise _err("expected a formula", x)
        return v[1]


def _parse_number(text: str):
    if text.startswith("#"):
        return None
    try:
        if "." in text:
            if not text.replace(".", "", 1).isdigit():
                return None
            return Fraction(text), True
        if text.isdigit():
            return Fraction(int(text)), False
    except ValueError:
        return None
    return None


def parse_problem(text: str) -> Script:
    """Parse an interpolation problem; raises ParseError with a position."""
    exprs = read_sexprs(text)
    if not exprs:
        raise ParseError("missing set-logic", 1, 1)
    script: Script | None = None
    decls: dict = {}
    user_sorts: set = set()
    for cmd in exprs:
        if isinstance(cmd, Tok) or not cmd or _atom_text(cmd[0]) is None:
            raise _err("expected a command", cmd)
        name = _atom_text(cmd[0])
        if script is None and name != "set-logic":
            raise _err("missing set-logic", cmd)
        if name == "set-logic":
            if script is not None:
                raise _err("duplicate set-logic", cmd)
            if len(cmd) != 2 or _atom_text(cmd[1]) not in LOGICS:
                raise _err(f"unsupported logic {_atom_text(cmd[1]) if len(cmd) > 1 else ''}", cmd)
            logic = _atom_text(cmd[1])
            script = Script(logic=logic, sort=LOGICS[logic])
        elif name == "declare-sort":
            if len(cmd) not in (2, 3) or _atom_text(cmd[1]) is None:
                raise _err("malformed declare-sort", cmd)
            if len(cmd) == 3 and _atom_text(cmd[2]) != "0":
                raise _err("only nullary sorts are supported", cmd)
            s = _atom_text(cmd[1])
            if s in (L.INT, L.REAL, L.BOOL) or s in user_sorts:
                raise _err(f"sort {s} already declared", cmd)
            user_sorts.add(s)
            script.sorts.append(s)
        elif name in ("declare-fun", "declare-const"):
            sym = _atom_text(cmd[1]) if len(cmd) > 1 else None
            if sym is None:
                raise _err(f"malformed {name}", cmd)
            if name == "declare-fun":
                if len(cmd) != 4 or isinstance(cmd[2], Tok):
                    raise _err("malformed declare-fun", cmd)
                arg_sorts = tuple(_sort_of(s, script, user_sorts) for s in cmd[2])
                res = _sort_of(cmd[3], script, user_sorts)
            else:
                if len(cmd) != 3:
                    raise _err("malformed declare-const", cmd)
                arg_sorts = ()
                res = _sort_of(cmd[2], script, user_sorts)
            if sym in decls:
                raise _err(f"symbol {sym} already declared", cmd)
            if any(s == L.BOOL for s in arg_sorts) or (arg_sorts and res == L.BOOL):
                raise _err("Boolean arguments/results of functions are not supported", cmd)
            if sym.startswith("@"):
                raise _err("symbols starting with '@' are reserved", cmd)
            decls[sym] = (arg_sorts, res)
            script.declarations.append((sym, arg_sorts, res))
        elif name == "assert":
            if len(cmd) != 2:
                raise _err("malformed assert", cmd)
            body = cmd[1]
            if isinstance(body, Tok) or not body or _atom_text(body[0]) != "!":
                raise _err("assertion must be named :named A or :named B", cmd)
            if len(body) != 4 or _atom_text(body[2]) != ":named":
                raise _err("assertion must be named :named A or :named B", body)
            part = _atom_text(body[3])
            if part not in ("A", "B"):
                raise _err(f"partition name must be A or B, got {part}", body[3])
            f = _Elab(script.sort, decls, user_sorts).formula(body[1], {})
            prev = script.assertions.get(part)
            script.assertions[part] = f if prev is None else L.mk_and(prev, f)
        elif name == "check-sat":
            script.check_sat = True
        elif name == "get-interpolants":
            names = tuple(_atom_text(a) for a in cmd[1:])
            if sorted(names) != ["A", "B"]:
                raise _err("get-interpolants expects the partitions A and B", cmd)
            script.interpolants = names
        else:
            raise _err(f"unsupported command {name}", cmd)
    return script


def _sort_of(x, script, user_sorts) -> str:
    s = _atom_text(x)
    if s in (L.INT, L.REAL, L.BOOL) or s in user_sorts:
        if s in (L.INT, L.REAL) and s != script.sort and script.logic not in ("QF_UF",):
            raise _err(f"sort {s} not allowed in {script.logic}", x)
        return s
    raise _err(f"unknown sort {s}", x)


# ---------------------------------------------------------------------------
# Partitions


class SymClass(enum.Enum):
    A = "A"
    B = "B"
    SHARED = "S"


class LitClass(enum.Enum):
    A = "A"
    B = "B"
    SHARED = "S"
    MIXED = "M"


@dataclass
class PartitionInfo:
    class_of: dict = field(default_factory=dict)
    aux: set = field(default_factory=set)

    def sym_class(self, sym: str) -> SymClass:
        if sym in self.aux:
            return SymClass.SHARED
        return self.class_of[sym]

    def add_local(self, sym: str, origin: str):
        self.class_of[sym] = SymClass.A if origin == "A" else SymClass.B

    def add_aux(self, sym: str):
        if sym in self.class_of:
            raise ValueError(f"auxiliary name {sym} clashes with an input symbol")
        self.aux.add(sym)

    def shared(self) -> set:
        return {s for s, c in self.class_of.items() if c is SymClass.SHARED} | set(self.aux)

    def symbols_class(self, syms) -> LitClass:
        has_a = has_b = False
        for s in syms:
            c = self.sym_class(s)
            if c is SymClass.A:
                has_a = True
            elif c is SymClass.B:
                has_b = True
        if has_a and has_b:
            return LitClass.MIXED
        if has_a:
            return LitClass.A
        if has_b:
            return LitClass.B
        return LitClass.SHARED

    def term_class(self, t: Term) -> LitClass:
        return self.symbols_class(L.term_symbols(t))

    def lit_class(self, lit) -> LitClass:
        atom = lit.atom if isinstance(lit, L.Literal) else lit
        return self.symbols_class(L.atom_symbols(atom))

    def swapped(self) -> "PartitionInfo":
        sw = {SymClass.A: SymClass.B, SymClass.B: SymClass.A, SymClass.SHARED: SymClass.SHARED}
        return PartitionInfo({s: sw[c] for s, c in self.class_of.items()}, set(self.aux))


def classify_symbols(a: Formula, b: Formula) -> PartitionInfo:
    sa = L.formula_symbols(a)
    sb = L.formula_symbols(b)
    out = {}
    for s in sorted(sa | sb):
        if s in sa and s in sb:
            out[s] = SymClass.SHARED
        elif s in sa:
            out[s] = SymClass.A
        else:
            out[s] = SymClass.B
    return PartitionInfo(out)


# ---------------------------------------------------------------------------
# Clausification


class Clausifier:
    """Structural CNF with fresh labels local to the origin partition."""

    def __init__(self, origin: str, prefix: str | None = None):
        self.origin = origin
        self.prefix = prefix or f"@L{origin}"
        self.labels: list[Term] = []

    def fresh(self) -> Term:
        v = L.mk_var(f"{self.prefix}{len(self.labels)}", L.BOOL)
        self.labels.append(v)
        return v

    def disjunct(self, g: Formula, out: list) -> list | None:
        if g == L.TRUE:
            return None
        if g == L.FALSE:
            return []
        if isinstance(g, L.Lit):
            return [g.lit]
        if isinstance(g, L.Or):
            lits = []
            for h in g.args:
                d = self.disjunct(h, out)
                if d is None:
                    return None
                lits.extend(d)
            return lits
        if isinstance(g, L.And):
            lab = L.Literal(L.bool_atom(self.fresh()), True)
            for h in g.args:
                d = self.disjunct(h, out)
                if d is not None:
                    out.append(L.Clause([-lab] + d))
            return [lab]
        raise L.LogicError(f"cannot clausify {g!r}")

    def clausify(self, f: Formula) -> list:
        out: list = []
        parts = f.args if isinstance(f, L.And) else (f,)
        for g in parts:
            d = self.disjunct(g, out)
            if d is not None:
                out.append(L.Clause(d))
        return [c for c in out if not c.is_tautology()]


def clausify(f: Formula, origin: str, prefix: str | None = None) -> list:
    return Clausifier(origin, prefix).clausify(f)


def clausify_with_labels(f: Formula, origin: str, prefix: str | None = None):
    c = Clausifier(origin, prefix)
    return c.clausify(f), c.labels


# ---------------------------------------------------------------------------
# Problems


@dataclass
class InterpolationProblem:
    clauses_a: list
    clauses_b: list
    partition: PartitionInfo
    sort: str
    a: Formula = L.TRUE
    b: Formula = L.TRUE
    signature: dict = field(default_factory=dict)
    div_table: dict = field(default_factory=dict)  # floordiv term -> its variable

    def origin_of(self, clause) -> set:
        out = set()
        if clause in self._set_a:
            out.add("A")
        if clause in self._set_b:
            out.add("B")
        return out

    def __post_init__(self):
        self._set_a = set(self.clauses_a)
        self._set_b = set(self.clauses_b)


def build_problem(a: Formula, b: Formula, sort: str, signature: dict | None = None) -> InterpolationProblem:
    """Clausify both partitions and classify symbols (labels local to origin)."""
    from .verification import encode_floor_div_parts

    table: dict = {}
    a_enc, a_side, _ = encode_floor_div_parts(a, "@dv", table)
    b_enc, b_side, _ = encode_floor_div_parts(b, "@dv", table)
    a_full = L.mk_and(a_enc, a_side)
    b_full = L.mk_and(b_enc, b_side)
    part = classify_symbols(a_full, b_full)
    ca, la = clausify_with_labels(a_full, "A")
    cb, lb = clausify_with_labels(b_full, "B")
    for v in la:
        part.add_local(v.name, "A")
    for v in lb:
        part.add_local(v.name, "B")
    return InterpolationProblem(ca, cb, part, sort, a, b, dict(signature or {}), table)


def problem_from_script(script: Script) -> InterpolationProblem:
    return build_problem(script.formula("A"), script.formula("B"), script.sort, script.signature)
