"""Partial-order constraint store over position terms.

The store keeps <= / < facts between terms, merges terms when unification
identifies them, and decides consistency: no directed cycle may contain a
strict edge, and a non-strict cycle collapses its members to a single node
(antisymmetry), reporting the induced equalities outward so the caller can
feed them back into its substitution.  Integer positions are implicitly
ordered by value even when no explicit fact mentions them.

Stores are value-semantic: every mutating operation returns a fresh store,
so each search branch can keep its own copy cheaply.
"""

from __future__ import annotations

from dataclasses import dataclass

from .terms import Meta, Pos, Substitution, Term, term_str, unify


@dataclass(frozen=True)
class OrderFact:
    left: Term
    right: Term
    strict: bool = False

    def __str__(self) -> str:
        op = "<" if self.strict else "<="
        return f"{term_str(self.left)}{op}{term_str(self.right)}"


class Inconsistent(Exception):
    """Raised when a fact or merge closes a strict cycle.  Carries a witness
    cycle of terms for diagnostics."""

    def __init__(self, cycle: list[Term]):
        self.cycle = cycle
        super().__init__("order cycle: " + " -> ".join(term_str(t) for t in cycle))


Equalities = list[tuple[Term, Term]]


class OrderStore:
    """Union-find over terms plus a set of (root, root, strict) edges."""

    def __init__(self):
        self._parent: dict[Term, Term] = {}
        self._edges: set[tuple[Term, Term, bool]] = set()

    def copy(self) -> "OrderStore":
        st = OrderStore()
        st._parent = dict(self._parent)
        st._edges = set(self._edges)
        return st

    # -- union-find ---------------------------------------------------------

    def find(self, t: Term) -> Term:
        while t in self._parent:
            t = self._parent[t]
        return t

    def _union(self, a: Term, b: Term) -> Term:
        """Join two classes; a class containing an integer position is rooted
        at that position so merged classes stay grounded."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if isinstance(ra, Pos) and isinstance(rb, Pos):
            raise Inconsistent([ra, rb, ra])
        if isinstance(rb, Pos):
            ra, rb = rb, ra
        self._parent[rb] = ra
        self._edges = {
            (ra if u == rb else u, ra if v == rb else v, s) for u, v, s in self._edges
        }
        return ra

    def terms(self) -> set[Term]:
        roots = {self.find(t) for t in self._parent}
        for u, v, _ in self._edges:
            roots.add(u)
            roots.add(v)
        return roots

    # -- consistency --------------------------------------------------------

    def _adjacency(self) -> dict[Term, list[tuple[Term, bool]]]:
        adj: dict[Term, list[tuple[Term, bool]]] = {}
        nodes = self.terms()
        for t in nodes:
            adj.setdefault(t, [])
        for u, v, s in self._edges:
            adj[u].append((v, s))
        positions = sorted((t for t in nodes if isinstance(t, Pos)), key=lambda p: p.value)
        for p, q in zip(positions, positions[1:]):
            adj[p].append((q, True))
        return adj

    def _normalize(self) -> Equalities:
        """Collapse non-strict cycles to single nodes; fail on strict cycles.
        Returns the equalities induced by collapsing."""
        induced: Equalities = []
        while True:
            adj = self._adjacency()
            sccs = _tarjan(adj)
            changed = False
            for comp in sccs:
                if len(comp) == 1:
                    t = comp[0]
                    if any(v == t and s for v, s in adj[t]):
                        raise Inconsistent([t, t])
                    continue
                comp_set = set(comp)
                for u in comp:
                    for v, s in adj[u]:
                        if s and v in comp_set:
                            raise Inconsistent(_cycle_witness(adj, u, v))
                first = comp[0]
                for other in comp[1:]:
                    induced.append((first, other))
                    self._union(first, other)
                changed = True
            if not changed:
                return induced

    # -- public operations ----------------------------------------------------

    def assert_order(self, a: Term, b: Term, strict: bool = False) -> tuple["OrderStore", Equalities]:
        """Store that additionally entails a <= b (or a < b).

        Raises Inconsistent when the new edge closes a strict cycle;
        otherwise returns the new store and any equalities forced by
        antisymmetry (the caller must unify those).
        """
        st = self.copy()
        ra, rb = st.find(a), st.find(b)
        if ra == rb:
            if strict:
                raise Inconsistent([ra, ra])
            return st, []
        st._edges.add((ra, rb, strict))
        eqs = st._normalize()
        return st, eqs

    def merge(self, a: Term, b: Term) -> tuple["OrderStore", Equalities]:
        """Store in which a and b share a node (called when unification
        binds one position to another)."""
        st = self.copy()
        st._union(a, b)
        eqs = st._normalize()
        return st, eqs

    def entails(self, a: Term, b: Term) -> str:
        """One of eq, lt, leq, gt, geq, incomparable, read off the
        reflexive-transitive closure (with implicit integer ordering)."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return "eq"
        fwd = self._reach(ra, rb)
        if fwd is not None:
            return "lt" if fwd else "leq"
        back = self._reach(rb, ra)
        if back is not None:
            return "gt" if back else "geq"
        return "incomparable"

    def _reach(self, src: Term, dst: Term) -> bool | None:
        """None if dst unreachable from src; else whether some path uses a
        strict edge (after normalize there is no path both ways)."""
        adj = self._adjacency()
        best: dict[Term, bool] = {src: False}
        queue = [src]
        while queue:
            u = queue.pop()
            for v, s in adj.get(u, ()):
                ns = best[u] or s
                if v not in best or (ns and not best[v]):
                    best[v] = ns
                    queue.append(v)
        return best.get(dst)

    def facts(self) -> list[OrderFact]:
        return [OrderFact(u, v, s) for u, v, s in sorted(self._edges, key=str)]


def _tarjan(adj: dict[Term, list[tuple[Term, bool]]]) -> list[list[Term]]:
    index: dict[Term, int] = {}
    low: dict[Term, int] = {}
    on_stack: set[Term] = set()
    stack: list[Term] = []
    out: list[list[Term]] = []
    counter = [0]

    def strongconnect(v: Term):
        # iterative to be safe on larger stores
        work = [(v, iter(adj[v]))]
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on_stack.add(v)
        while work:
            node, it = work[-1]
            advanced = False
            for w, _s in it:
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(adj[w])))
                    advanced = True
                    break
                if w in on_stack:
                    low[node] = min(low[node], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                out.append(comp)

    for v in adj:
        if v not in index:
            strongconnect(v)
    return out


def _cycle_witness(adj, u: Term, v: Term) -> list[Term]:
    """The cycle closed by a strict edge u -> v inside one component."""
    prev: dict[Term, Term | None] = {v: None}
    queue = [v]
    while queue:
        x = queue.pop(0)
        if x == u:
            break
        for y, _s in adj.get(x, ()):
            if y not in prev:
                prev[y] = x
                queue.append(y)
    if u not in prev:
        return [u, v, u]
    back = [u]
    while prev[back[-1]] is not None:
        back.append(prev[back[-1]])
    return [u] + list(reversed(back))


def store_from_facts(facts) -> tuple[OrderStore, Equalities]:
    st = OrderStore()
    eqs: Equalities = []
    for f in facts:
        st, new = st.assert_order(f.left, f.right, f.strict)
        eqs.extend(new)
    return st, eqs


def merge_bindings(old: Substitution, new: Substitution,
                   store: OrderStore) -> tuple[Substitution, OrderStore] | None:
    """Propagate the bindings added between old and new into the store,
    unifying any equalities antisymmetry forces, to a fixpoint.  None when
    the store becomes inconsistent or a forced equality fails to unify."""
    subst = new
    pending = [(n, t) for n, t in new.items() if n not in old]
    while pending:
        name, t = pending.pop()
        try:
            store, eqs = store.merge(Meta(name), t)
        except Inconsistent:
            return None
        for a, b in eqs:
            before = subst
            subst = unify(a, b, subst)
            if subst is None:
                return None
            pending.extend((n, t2) for n, t2 in subst.items() if n not in before)
    return subst, store
