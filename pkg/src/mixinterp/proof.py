"""Resolution proof nodes, serialization and an independent checker."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from . import logic as L
from .euf import CongStep, EqStep, Path, PathError, check_path
from .logic import Clause, Literal
from .printer import clause_str, literal_str, num_str, term_str
from .simplex import eq_implies_leq_clause, trichotomy_clause

INPUT, EUF, LA, TC, RES = "input", "euf", "la", "tc", "res"

_ids = itertools.count()


@dataclass(eq=False)
class ProofNode:
    kind: str
    clause: Clause
    origin: str | None = None  # input leaves: "A" or "B"
    path: Path | None = None  # EUF lemmas
    farkas: tuple = ()  # LA lemmas: ((literal of the conflict, coefficient), ...)
    shape: str | None = None  # TC clauses: "trichotomy" | "eqImpliesLeq"
    left: "ProofNode | None" = None
    right: "ProofNode | None" = None
    pivot: Literal | None = None
    id: int = field(default_factory=lambda: next(_ids))

    @property
    def premises(self):
        return (self.left, self.right) if self.kind == RES else ()

    def __repr__(self):
        return f"ProofNode#{self.id}({self.kind}, {self.clause!r})"


def input_leaf(clause, origin: str) -> ProofNode:
    return ProofNode(INPUT, Clause(clause), origin=origin)


def euf_leaf(clause, path: Path) -> ProofNode:
    return ProofNode(EUF, Clause(clause), path=path)


def la_leaf(clause, farkas: dict) -> ProofNode:
    items = tuple(sorted(((l, Fraction(c)) for l, c in farkas.items()), key=lambda lc: lc[0].sort_key()))
    return ProofNode(LA, Clause(clause), farkas=items)


def tc_leaf(clause, shape: str) -> ProofNode:
    return ProofNode(TC, Clause(clause), shape=shape)


def resolve(n1: ProofNode, n2: ProofNode, pivot: Literal) -> ProofNode:
    """Resolvent of n1 (containing pivot) and n2 (containing its negation)."""
    if not pivot.pol:
        n1, n2, pivot = n2, n1, -pivot
    if pivot not in n1.clause or -pivot not in n2.clause:
        raise ValueError(f"pivot {pivot!r} not clashing in premises")
    lits = [l for l in n1.clause if l != pivot] + [l for l in n2.clause if l != -pivot]
    return ProofNode(RES, Clause(lits), left=n1, right=n2, pivot=pivot)


def postorder(root: ProofNode) -> list:
    out, seen = [], set()
    stack = [(root, False)]
    while stack:
        n, done = stack.pop()
        if done:
            out.append(n)
            continue
        if id(n) in seen:
            continue
        seen.add(id(n))
        stack.append((n, True))
        for p in reversed(n.premises):
            if id(p) not in seen:
                stack.append((p, False))
    return out


def leaves(root: ProofNode) -> list:
    return [n for n in postorder(root) if n.kind != RES]


# ---------------------------------------------------------------------------
# Checking


class ProofError(Exception):
    def __init__(self, node: ProofNode, msg: str):
        super().__init__(f"node {node.id} ({node.kind}): {msg}")
        self.node = node


def check_farkas(clause: Clause, farkas) -> str | None:
    lits = [l for l, _ in farkas]
    if Clause(-l for l in lits) != clause:
        return "clause is not the negated conflict"
    total = L.LinTerm()
    bound = L.ZERO
    sorts = set()
    for lit, k in farkas:
        if not isinstance(lit.atom, L.LAAtom):
            return f"non-arithmetic literal {lit!r}"
        if k <= 0:
            return f"coefficient of {lit!r} not positive"
        lhs, b = L.materialize(lit)
        sorts.add(lit.atom.sort)
        total = total + lhs.scale(k)
        bound = bound + b.scale(k)
    if len(sorts) > 1:
        return "mixed sorts"
    if not total.is_const() or total.const != 0:
        return "coefficients do not cancel"
    if not bound < L.ZERO:
        return "bound sum is not negative"
    return None


def _check_tc(node: ProofNode) -> str | None:
    eqs = [l for l in node.clause if isinstance(l.atom, L.EqAtom)]
    if len(eqs) != 1:
        return "expected exactly one equality atom"
    atom = eqs[0].atom
    u, v = atom.lhs, atom.rhs
    if node.shape == "trichotomy":
        ok = node.clause == trichotomy_clause(u, v)
    elif node.shape == "eqImpliesLeq":
        ok = node.clause in (eq_implies_leq_clause(u, v), eq_implies_leq_clause(v, u))
    else:
        return f"unknown shape {node.shape}"
    return None if ok else f"clause does not have shape {node.shape}"


def _check_euf(node: ProofNode) -> str | None:
    path = node.path
    if path is None:
        return "missing path"
    pos = [l for l in node.clause if l.pol]
    if len(pos) != 1 or not isinstance(pos[0].atom, L.EqAtom):
        return "expected one positive equality"
    atom = pos[0].atom
    if {path.start, path.end} != {atom.lhs, atom.rhs}:
        return "path endpoints do not match the equality"
    negs = {-l for l in node.clause if not l.pol}
    try:
        check_path(path, negs)
    except PathError as e:
        return str(e)
    if set(path.literals()) != negs:
        return "clause has literals not used on the path"
    return None


def check_node(node: ProofNode, problem=None) -> str | None:
    c = node.clause
    if node.kind == INPUT:
        if node.origin not in ("A", "B"):
            return "bad origin"
        if problem is not None:
            pool = problem.clauses_a if node.origin == "A" else problem.clauses_b
            if c not in set(pool):
                return f"clause not an input clause of {node.origin}"
        return None
    if node.kind == LA:
        return check_farkas(c, node.farkas)
    if node.kind == EUF:
        return _check_euf(node)
    if node.kind == TC:
        return _check_tc(node)
    if node.kind == RES:
        p = node.pivot
        if p is None or node.left is None or node.right is None:
            return "incomplete resolution"
        if p not in node.left.clause:
            return f"pivot {p!r} absent from left premise"
        if -p not in node.right.clause:
            return f"negated pivot {-p!r} absent from right premise"
        expect = Clause([l for l in node.left.clause if l != p] + [l for l in node.right.clause if l != -p])
        if expect != c:
            return "clause is not the resolvent"
        return None
    return f"unknown kind {node.kind}"


def check_proof(root: ProofNode, problem=None, require_empty: bool = True):
    """Return 'ok' or a diagnostic naming the first failing node."""
    for n in postorder(root):
        msg = check_node(n, problem)
        if msg is not None:
            return f"node {n.id} ({n.kind}): {msg}"
    if require_empty and len(root.clause) != 0:
        return f"node {root.id} (root): clause is not empty"
    return "ok"


# ---------------------------------------------------------------------------
# Serialization


def path_str(p: Path) -> str:
    parts = []
    for st in p.steps:
        if isinstance(st, EqStep):
            parts.append(f"(eq {literal_str(st.lit)} {term_str(st.left)} {term_str(st.right)})")
        else:
            sub = " ".join(path_str(a) for a in st.args)
            parts.append(f"(cong {term_str(st.left)} {term_str(st.right)} {sub})")
    return "(path " + term_str(p.start) + " " + term_str(p.end) + "".join(" " + x for x in parts) + ")"


def node_str(n: ProofNode, ids: dict) -> str:
    cs = clause_str(n.clause)
    if n.kind == INPUT:
        return f"(input {n.origin} {cs})"
    if n.kind == EUF:
        return f"(euf-lemma {cs} {path_str(n.path)})"
    if n.kind == LA:
        sort = n.farkas[0][0].atom.sort if n.farkas else L.INT
        ks = " ".join(f"({num_str(k, L.INT if k.denominator == 1 else sort)} {literal_str(l)})" for l, k in n.farkas)
        return f"(la-lemma {cs} (farkas {ks}))"
    if n.kind == TC:
        return f"(tc {cs})"
    return f"(res {literal_str(n.pivot)} {ids[id(n.left)]} {ids[id(n.right)]})"


def serialize(root: ProofNode) -> str:
    """One line per node in post-order; nodes numbered from 0."""
    nodes = postorder(root)
    ids = {id(n): i for i, n in enumerate(nodes)}
    lines = [f"(step {i} {node_str(n, ids)})" for i, n in enumerate(nodes)]
    return "(proof\n" + "\n".join(lines) + ")\n"


def farkas_identities_hold(node: ProofNode) -> bool:
    return node.kind == LA and check_farkas(node.clause, node.farkas) is None


__all__ = [
    "ProofNode",
    "ProofError",
    "input_leaf",
    "euf_leaf",
    "la_leaf",
    "tc_leaf",
    "resolve",
    "postorder",
    "leaves",
    "check_proof",
    "check_node",
    "check_farkas",
    "serialize",
    "CongStep",
    "EqStep",
]
