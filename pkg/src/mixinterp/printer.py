"""SMT-LIB rendering of terms, literals, formulas and models."""
from __future__ import annotations

import re
from fractions import Fraction

from . import logic as L

_SIMPLE = re.compile(r"^[A-Za-z~!@$%^&*_+=<>.?/\-][A-Za-z0-9~!@$%^&*_+=<>.?/\-]*$")


def symbol_str(name: str) -> str:
    if _SIMPLE.match(name):
        return name
    return "|" + name + "|"


def num_str(value, sort: str) -> str:
    value = Fraction(value)
    if value < 0:
        return f"(- {num_str(-value, sort)})"
    if sort == L.REAL:
        if value.denominator == 1:
            return f"{value.numerator}.0"
        return f"(/ {value.numerator}.0 {value.denominator}.0)"
    return str(value.numerator)


def lin_str(lin: "L.LinTerm", sort: str | None = None) -> str:
    if sort is None:
        sorts = {t.sort for t in lin.terms()}
        sort = sorts.pop() if len(sorts) == 1 else L.INT
    parts = []
    for t, c in lin.coeffs:
        ts = term_str(t)
        if c == 1:
            parts.append(ts)
        elif c == -1:
            parts.append(f"(- {ts})")
        else:
            parts.append(f"(* {num_str(c, sort)} {ts})")
    if lin.const != 0 or not parts:
        parts.append(num_str(lin.const, sort))
    if len(parts) == 1:
        return parts[0]
    return "(+ " + " ".join(parts) + ")"


def term_str(t: "L.Term") -> str:
    k = t.kind
    if k == "var":
        return symbol_str(t.name)
    if k == "num":
        return num_str(t.value, t.sort)
    if k == "app":
        return "(" + symbol_str(t.name) + " " + " ".join(term_str(a) for a in t.args) + ")"
    if k == "affine":
        return lin_str(t.lin, t.sort)
    if k == "floordiv":
        return f"(div {term_str(t.args[0])} {t.k})"
    raise ValueError(k)


def atom_str(atom: "L.Atom") -> str:
    if isinstance(atom, L.LAAtom):
        op = "<" if atom.bound.eps < 0 else "<="
        return f"({op} {lin_str(atom.lhs, atom.sort)} {num_str(atom.bound.real, atom.sort)})"
    if isinstance(atom, L.EqAtom):
        return f"(= {term_str(atom.lhs)} {term_str(atom.rhs)})"
    return symbol_str(atom.var.name)


def literal_str(lit: "L.Literal") -> str:
    s = atom_str(lit.atom)
    return s if lit.pol else f"(not {s})"


def formula_str(f: "L.Formula") -> str:
    if isinstance(f, L.Const):
        return "true" if f.value else "false"
    if isinstance(f, L.Lit):
        return literal_str(f.lit)
    if isinstance(f, L.And):
        return "(and " + " ".join(formula_str(g) for g in f.args) + ")"
    if isinstance(f, L.Or):
        return "(or " + " ".join(formula_str(g) for g in f.args) + ")"
    if isinstance(f, L.LA):
        return formula_str(f.f)
    if isinstance(f, L.EQ):
        return formula_str(L.expand_patterns(f))
    raise ValueError(f)


def clause_str(clause) -> str:
    return "(clause" + "".join(" " + literal_str(l) for l in clause) + ")"


def value_str(v, sort: str) -> str:
    if sort in L.ARITH:
        return num_str(v, sort)
    if sort == L.BOOL:
        return "true" if v else "false"
    return f"(as @{sort}!{v} {sort})"


def model_str(m: "L.Model") -> str:
    lines = ["(model"]
    for t in sorted(m.values, key=lambda u: u.name):
        if t.name.startswith("@"):  # labels and other internal symbols
            continue
        lines.append(f"  (define-fun {symbol_str(t.name)} () {t.sort} {value_str(m.values[t], t.sort)})")
    for fn in sorted(m.funcs):
        arg_sorts, res = m.sorts.get(fn, (None, L.INT))
        table = m.funcs[fn]
        if arg_sorts is None:
            some = next(iter(table), ())
            arg_sorts = tuple(L.INT for _ in some)
        params = " ".join(f"(x!{i} {s})" for i, s in enumerate(arg_sorts))
        body = None
        entries = sorted(table.items(), key=lambda kv: tuple(Fraction(v) for v in kv[0]))
        for args, val in reversed(entries):
            cond = [f"(= x!{i} {value_str(a, arg_sorts[i])})" for i, a in enumerate(args)]
            test = cond[0] if len(cond) == 1 else "(and " + " ".join(cond) + ")"
            vs = value_str(val, res)
            body = vs if body is None else f"(ite {test} {vs} {body})"
        if body is None:
            body = value_str(0, res)
        lines.append(f"  (define-fun {symbol_str(fn)} ({params}) {res} {body})")
    lines.append(")")
    return "\n".join(lines) + "\n"
