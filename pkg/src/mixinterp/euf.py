"""Proof-producing congruence closure."""
from __future__ import annotations

from dataclasses import dataclass

from . import logic as L
from .logic import Literal, Term


@dataclass(frozen=True)
class EqStep:
    """An asserted equality used from ``left`` to ``right``."""

    lit: Literal
    left: Term
    right: Term


@dataclass(frozen=True)
class CongStep:
    """f(u...) = f(v...) from equal arguments."""

    left: Term
    right: Term
    args: tuple  # Path per argument


@dataclass(frozen=True)
class Path:
    start: Term
    end: Term
    steps: tuple = ()

    def reversed(self) -> "Path":
        out = []
        for st in reversed(self.steps):
            if isinstance(st, EqStep):
                out.append(EqStep(st.lit, st.right, st.left))
            else:
                out.append(CongStep(st.right, st.left, tuple(p.reversed() for p in st.args)))
        return Path(self.end, self.start, tuple(out))

    def literals(self) -> list:
        out: list = []
        seen = set()
        stack = [self]
        while stack:
            p = stack.pop()
            for st in p.steps:
                if isinstance(st, EqStep):
                    if st.lit not in seen:
                        seen.add(st.lit)
                        out.append(st.lit)
                else:
                    stack.extend(reversed(st.args))
        return out


class PathError(Exception):
    pass


def check_path(p: Path, available: set | None = None) -> None:
    """Raise PathError unless every step connects and uses available equalities."""
    cur = p.start
    for st in p.steps:
        if st.left is not cur:
            raise PathError(f"path breaks at {cur!r}")
        if isinstance(st, EqStep):
            a = st.lit.atom
            if not (st.lit.pol and isinstance(a, L.EqAtom)):
                raise PathError(f"step {st.lit!r} is not an equality")
            if {a.lhs, a.rhs} != {st.left, st.right}:
                raise PathError(f"step {st.lit!r} does not connect {st.left!r} and {st.right!r}")
            if available is not None and st.lit not in available:
                raise PathError(f"equality {st.lit!r} not available")
        else:
            l, r = st.left, st.right
            if l.kind != "app" or r.kind != "app" or l.name != r.name or len(l.args) != len(r.args):
                raise PathError(f"bad congruence {l!r} = {r!r}")
            if len(st.args) != len(l.args):
                raise PathError("congruence arity mismatch")
            for sub, u, v in zip(st.args, l.args, r.args):
                if sub.start is not u or sub.end is not v:
                    raise PathError(f"argument path does not connect {u!r} and {v!r}")
                check_path(sub, available)
        cur = st.right
    if cur is not p.end:
        raise PathError("path does not reach its end")


class CongruenceClosure:
    """Union-find with a proof forest and a signature table."""

    def __init__(self):
        self.parent: dict = {}
        self.members: dict = {}
        self.edge: dict = {}  # proof forest: term -> (other, reason)
        self.sig: dict = {}
        self.uses: dict = {}
        self.apps: list = []

    def add(self, t: Term):
        stack = [t]
        order = []
        while stack:
            u = stack.pop()
            if u in self.parent:
                continue
            order.append(u)
            self.parent[u] = u
            self.members[u] = [u]
            self.uses[u] = []
            if u.kind == "app":
                stack.extend(u.args)
        pending = []
        for u in reversed(order):
            if u.kind == "app":
                for a in u.args:
                    if u not in self.uses[self.find(a)]:
                        self.uses[self.find(a)].append(u)
                self.apps.append(u)
                key = self._sig(u)
                other = self.sig.get(key)
                if other is None:
                    self.sig[key] = u
                elif self.find(other) is not self.find(u):
                    pending.append((u, other, None))
        self._process(pending)

    def find(self, t: Term) -> Term:
        while self.parent[t] is not t:
            t = self.parent[t]
        return t

    def _sig(self, u: Term):
        return (u.name, u.sort, tuple(self.find(a).idx for a in u.args))

    def merge(self, a: Term, b: Term, lit: Literal):
        self.add(a)
        self.add(b)
        self._process([(a, b, lit)])

    def _process(self, pending):
        while pending:
            a, b, reason = pending.pop(0)
            ra, rb = self.find(a), self.find(b)
            if ra is rb:
                continue
            self._add_edge(a, b, reason)
            if len(self.members[ra]) > len(self.members[rb]):
                ra, rb = rb, ra
            # ra joins rb
            moved_uses = self.uses[ra]
            for u in moved_uses:
                old = (u.name, u.sort, tuple(self.find(x).idx for x in u.args))
                if self.sig.get(old) is u:
                    del self.sig[old]
            for m in self.members[ra]:
                self.parent[m] = rb
            self.members[rb].extend(self.members[ra])
            for u in moved_uses:
                key = self._sig(u)
                other = self.sig.get(key)
                if other is None:
                    self.sig[key] = u
                elif self.find(other) is not self.find(u):
                    pending.append((u, other, None))
                if u not in self.uses[rb]:
                    self.uses[rb].append(u)
            # signatures of other apps indexed by stale roots
            for u in self.uses[rb]:
                key = self._sig(u)
                other = self.sig.get(key)
                if other is None:
                    self.sig[key] = u
                elif other is not u and self.find(other) is not self.find(u):
                    pending.append((u, other, None))

    def _add_edge(self, a: Term, b: Term, reason):
        # re-root a's proof tree at a, then hang it under b
        prev, prev_reason = None, None
        cur = a
        while cur is not None:
            nxt = self.edge.get(cur)
            if prev is None:
                self.edge.pop(cur, None)
            else:
                self.edge[cur] = (prev, prev_reason)
            if nxt is None:
                break
            prev, prev_reason = cur, nxt[1]
            cur = nxt[0]
        self.edge[a] = (b, reason)

    def _ancestors(self, t: Term) -> list:
        out = [t]
        while t in self.edge:
            t = self.edge[t][0]
            out.append(t)
        return out

    def explain(self, a: Term, b: Term) -> Path:
        if a is b:
            return Path(a, b, ())
        if self.find(a) is not self.find(b):
            raise PathError(f"{a!r} and {b!r} are not congruent")
        up_a = self._ancestors(a)
        up_b = self._ancestors(b)
        set_b = set(up_b)
        lca = next(t for t in up_a if t in set_b)
        steps = []
        for t in up_a[: up_a.index(lca)]:
            nxt, reason = self.edge[t]
            steps.append(self._step(t, nxt, reason))
        tail = []
        for t in up_b[: up_b.index(lca)]:
            nxt, reason = self.edge[t]
            tail.append(self._step(nxt, t, reason))
        steps.extend(reversed(tail))
        return Path(a, b, tuple(steps))

    def _step(self, left: Term, right: Term, reason):
        if reason is not None:
            return EqStep(reason, left, right)
        args = tuple(self.explain(u, v) for u, v in zip(left.args, right.args))
        return CongStep(left, right, args)


def _eq_lits(asserted):
    eqs, diseqs = [], []
    for lit in asserted:
        if isinstance(lit.atom, L.EqAtom):
            (eqs if lit.pol else diseqs).append(lit)
    key = L.Literal.sort_key
    return sorted(set(eqs), key=key), sorted(set(diseqs), key=key)


def closure(asserted, extra_terms=()) -> CongruenceClosure:
    eqs, diseqs = _eq_lits(asserted)
    cc = CongruenceClosure()
    for t in extra_terms:
        cc.add(t)
    for lit in eqs + diseqs:
        cc.add(lit.atom.lhs)
        cc.add(lit.atom.rhs)
    for lit in eqs:
        cc.merge(lit.atom.lhs, lit.atom.rhs, lit)
    return cc


def euf_check(asserted, extra_terms=()):
    """None if consistent, else (lemma clause, path) for the first violated disequality."""
    eqs, diseqs = _eq_lits(asserted)
    cc = closure(eqs, extra_terms)
    for lit in diseqs:
        a, b = lit.atom.lhs, lit.atom.rhs
        cc.add(a)
        cc.add(b)
        if cc.find(a) is cc.find(b):
            path = cc.explain(a, b)
            return lemma_clause(lit.atom, path), path
    return None


def lemma_clause(atom: L.EqAtom, path: Path) -> L.Clause:
    return L.Clause([Literal(atom, True)] + [-l for l in path.literals()])


def euf_propagate(asserted, terms=None, arith_only: bool = True):
    """Implied equalities (t, u, path) between distinct terms of the same class."""
    eqs, _ = _eq_lits(asserted)
    cc = closure(eqs, terms or ())
    direct = {frozenset((l.atom.lhs, l.atom.rhs)) for l in eqs}
    pool = list(terms) if terms is not None else sorted(cc.parent, key=lambda t: t.idx)
    out = []
    for i, t in enumerate(pool):
        if arith_only and not t.is_arith:
            continue
        for u in pool[i + 1 :]:
            if u.sort != t.sort or frozenset((t, u)) in direct:
                continue
            if cc.find(t) is cc.find(u):
                out.append((t, u, cc.explain(t, u)))
    return out
