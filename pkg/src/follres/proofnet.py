"""Proof structures and the contraction-based correctness check.

A sequent unfolds into a forest of formula occurrences wired by links:
solid tensor/existential links and dashed par/universal links, the latter
carrying an eigenvariable.  Identifying each positive atom with a negative
partner turns the forest into a candidate proof structure; the candidate is
a real proof iff its abstract form (formulas replaced by their free
eigenvariable sets) contracts to a single vertex.

Matching search runs over a candidate table with three local filters per
pair (unification, order-store consistency, and the wrong-side check that
no universal link's eigenvariable lands outside its own subtree) plus unit
propagation, so heavily constrained sentences link up without backtracking.
"""

from __future__ import annotations

import itertools
import math
import random
from collections import defaultdict
from dataclasses import dataclass, field

from .order import OrderStore, merge_bindings
from .terms import (
    Atom,
    Const,
    Eigen,
    Exists,
    Forall,
    Formula,
    Limp,
    LevelCounter,
    Meta,
    Sequent,
    Substitution,
    Tensor,
    formula_str,
    free_eigenvariables,
    instantiate,
    substitute,
    unify_atoms,
)

TENSOR, PAR, EXISTENTIAL, UNIVERSAL = "tensor", "par", "existential", "universal"


@dataclass(frozen=True)
class Occurrence:
    oid: int
    formula: Formula
    positive: bool
    source: int  # antecedent index, -1 for the succedent
    path: tuple[int, ...]  # position inside its unfold tree


@dataclass(frozen=True)
class Link:
    kind: str
    premisses: tuple[int, ...]
    conclusions: tuple[int, ...]
    main: int
    actives: tuple[int, ...] = ()
    term: object | None = None  # Meta of an existential link / Eigen of a universal

    @property
    def body(self) -> int:
        """The quantified-body side of a universal link (where every
        occurrence of the eigenvariable must end up)."""
        return self.premisses[0] if self.conclusions == (self.main,) else self.conclusions[0]


@dataclass
class ProofStructure:
    occurrences: dict[int, Occurrence]
    links: list[Link]

    def positive_atoms(self) -> list[Occurrence]:
        return [o for o in self.occurrences.values()
                if isinstance(o.formula, Atom) and o.positive]

    def negative_atoms(self) -> list[Occurrence]:
        return [o for o in self.occurrences.values()
                if isinstance(o.formula, Atom) and not o.positive]

    def hypotheses(self) -> list[int]:
        concl = {o for l in self.links for o in l.conclusions}
        return sorted(o for o in self.occurrences if o not in concl)

    def conclusions(self) -> list[int]:
        prem = {o for l in self.links for o in l.premisses}
        return sorted(o for o in self.occurrences if o not in prem)


def unfold(seq: Sequent, decorations=None) -> ProofStructure:
    """Unfold antecedent formulas negatively and the succedent positively.

    Instantiable quantifiers (negative universal, positive existential) get
    fresh metavariables; the others get fresh eigenvariables.
    """
    counter = itertools.count()
    levels = LevelCounter()
    occurrences: dict[int, Occurrence] = {}
    links: list[Link] = []

    def rec(f: Formula, positive: bool, source: int, path: tuple[int, ...]) -> int:
        oid = next(counter)
        occurrences[oid] = Occurrence(oid, f, positive, source, path)
        if isinstance(f, Atom):
            return oid
        if isinstance(f, Tensor):
            left = rec(f.left, positive, source, path + (0,))
            right = rec(f.right, positive, source, path + (1,))
            if positive:
                links.append(Link(TENSOR, (left, right), (oid,), main=oid,
                                  actives=(left, right)))
            else:
                links.append(Link(PAR, (oid,), (left, right), main=oid,
                                  actives=(left, right)))
            return oid
        if isinstance(f, Limp):
            left = rec(f.left, not positive, source, path + (0,))
            right = rec(f.right, positive, source, path + (1,))
            if positive:
                links.append(Link(PAR, (left, right), (oid,), main=oid,
                                  actives=(left, right)))
            else:
                links.append(Link(TENSOR, (left, oid), (right,), main=oid,
                                  actives=(left, right)))
            return oid
        if isinstance(f, Forall):
            if positive:
                e = levels.make_eigen(f.var)
                body = rec(instantiate(f.body, f.var, e), positive, source, path + (0,))
                links.append(Link(UNIVERSAL, (body,), (oid,), main=oid, term=e))
            else:
                m = levels.make_meta(f.var)
                body = rec(instantiate(f.body, f.var, m), positive, source, path + (0,))
                links.append(Link(EXISTENTIAL, (oid,), (body,), main=oid,
                                  actives=(body,), term=m))
            return oid
        if isinstance(f, Exists):
            if positive:
                m = levels.make_meta(f.var)
                body = rec(instantiate(f.body, f.var, m), positive, source, path + (0,))
                links.append(Link(EXISTENTIAL, (body,), (oid,), main=oid,
                                  actives=(body,), term=m))
            else:
                e = levels.make_eigen(f.var)
                body = rec(instantiate(f.body, f.var, e), positive, source, path + (0,))
                links.append(Link(UNIVERSAL, (oid,), (body,), main=oid, term=e))
            return oid
        raise TypeError(f"not a formula: {f!r}")

    for i, f in enumerate(seq.antecedent):
        rec(f, False, i, ())
    rec(seq.succedent, True, -1, ())
    return ProofStructure(occurrences, links)


# ---------------------------------------------------------------------------
# Components and the existential frontier


def skolemize_eigens(f: Formula, names: set[str] | None = None) -> Formula:
    """Replace free eigenvariables (all of them, or the given names) by the
    rigid constants that stand for them once their link is out of scope."""
    if isinstance(f, Atom):
        args = tuple(
            Const(f"c_{a.name}") if isinstance(a, Eigen) and (names is None or a.name in names) else a
            for a in f.args
        )
        return Atom(f.pred, args)
    if isinstance(f, (Tensor, Limp)):
        kind = type(f)
        return kind(skolemize_eigens(f.left, names), skolemize_eigens(f.right, names))
    if isinstance(f, (Forall, Exists)):
        kind = type(f)
        return kind(f.var, skolemize_eigens(f.body, names))
    raise TypeError(f"not a formula: {f!r}")


def existential_frontier(ps: ProofStructure, x: Eigen, subst: Substitution | None = None) -> set[int]:
    """Main occurrences of existential links whose active formula contains x
    free while the main formula does not."""
    subst = subst or {}
    out: set[int] = set()
    for l in ps.links:
        if l.kind != EXISTENTIAL:
            continue
        active = substitute(ps.occurrences[l.actives[0]].formula, subst)
        main = substitute(ps.occurrences[l.main].formula, subst)
        if x.name in free_eigenvariables(active) and x.name not in free_eigenvariables(main):
            out.add(l.main)
    return out


@dataclass
class Component:
    """A maximal substructure of solid links only, with detached
    eigenvariables replaced by their constants."""

    vertex_formulas: dict[int, Formula]
    links: list[Link]
    hypotheses: list[int]
    conclusions: list[int]

    def sequent(self) -> Sequent | None:
        if len(self.conclusions) != 1:
            return None
        ant = tuple(self.vertex_formulas[v] for v in self.hypotheses)
        return Sequent(ant, self.vertex_formulas[self.conclusions[0]])


def _vertex_map(ps: ProofStructure, matching: dict[int, int] | None) -> dict[int, int]:
    """Occurrence id -> vertex id, fusing matched atom pairs."""
    vmap = {oid: oid for oid in ps.occurrences}
    if matching:
        for pos, neg in matching.items():
            vmap[pos] = vmap[neg] = min(pos, neg)
    return vmap


def components(ps: ProofStructure, matching: dict[int, int] | None = None,
               subst: Substitution | None = None) -> list[Component]:
    """Remove par and universal links, take connected pieces.  Free
    eigenvariables of a piece (their binding link is never inside) become
    skolem constants."""
    subst = subst or {}
    vmap = _vertex_map(ps, matching)
    kept = [l for l in ps.links if l.kind in (TENSOR, EXISTENTIAL)]

    parent: dict[int, int] = {v: v for v in set(vmap.values())}

    def find(v):
        while parent[v] != v:
            v = parent[v]
        return v

    def union(a, b):
        parent[find(a)] = find(b)

    for l in kept:
        ports = [vmap[o] for o in l.premisses + l.conclusions]
        for other in ports[1:]:
            union(ports[0], other)

    groups: dict[int, list[int]] = defaultdict(list)
    for v in parent:
        groups[find(v)].append(v)

    out = []
    for verts in groups.values():
        vset = set(verts)
        comp_links = [l for l in kept if vmap[l.main] in vset]
        prem = {vmap[o] for l in comp_links for o in l.premisses}
        concl = {vmap[o] for l in comp_links for o in l.conclusions}
        formulas = {}
        for v in verts:
            occs = [o for o in ps.occurrences.values() if vmap[o.oid] == v]
            f = substitute(occs[0].formula, subst)
            formulas[v] = skolemize_eigens(f)
        out.append(Component(
            vertex_formulas=formulas,
            links=comp_links,
            hypotheses=sorted(v for v in vset if v not in concl),
            conclusions=sorted(v for v in vset if v not in prem),
        ))
    out.sort(key=lambda c: min(c.vertex_formulas))
    return out


# ---------------------------------------------------------------------------
# Abstract proof structures and contraction


@dataclass
class AbstractProofStructure:
    vertices: list[int]
    labels: dict[int, frozenset[str]]
    solids: list[tuple[int, int]]
    pars: list[tuple[int, int, int]]  # (main, left, right)
    unis: list[tuple[int, int, str]]  # (body, main, eigenvariable name)

    def edge_count(self) -> int:
        # a par pair counts as one edge unit
        return len(self.solids) + len(self.pars) + len(self.unis)


def abstract(ps: ProofStructure, matching: dict[int, int] | None = None,
             subst: Substitution | None = None) -> AbstractProofStructure:
    """Forget formulas, keeping per vertex the free eigenvariables plus any
    existential-frontier contributions."""
    subst = subst or {}
    vmap = _vertex_map(ps, matching)
    labels: dict[int, set[str]] = defaultdict(set)
    for o in ps.occurrences.values():
        labels[vmap[o.oid]] |= free_eigenvariables(substitute(o.formula, subst))
    for l in ps.links:
        if l.kind == UNIVERSAL:
            for main in existential_frontier(ps, l.term, subst):
                labels[vmap[main]].add(l.term.name)

    solids: list[tuple[int, int]] = []
    pars: list[tuple[int, int, int]] = []
    unis: list[tuple[int, int, str]] = []
    for l in ps.links:
        if l.kind == TENSOR:
            c = vmap[l.conclusions[0]]
            for p in l.premisses:
                solids.append((vmap[p], c))
        elif l.kind == EXISTENTIAL:
            solids.append((vmap[l.premisses[0]], vmap[l.conclusions[0]]))
        elif l.kind == PAR:
            pars.append((vmap[l.main], vmap[l.actives[0]], vmap[l.actives[1]]))
        elif l.kind == UNIVERSAL:
            unis.append((vmap[l.body], vmap[l.main], l.term.name))
    vertices = sorted(set(vmap.values()))
    return AbstractProofStructure(
        vertices=vertices,
        labels={v: frozenset(labels[v]) for v in vertices},
        solids=solids,
        pars=pars,
        unis=unis,
    )


@dataclass
class ContractionResult:
    success: bool
    trace: list[tuple[str, int, int]]  # (kind, vertices before, edges before)
    residual_vertices: int
    residual_edges: int


def contract(aps: AbstractProofStructure, rng: random.Random | None = None) -> ContractionResult:
    """Exhaustively contract solid edges, par pairs whose premiss ports
    meet, and universal edges whose eigenvariable has fully collected at
    the body vertex.  Success iff a single vertex with no edges remains.
    Self-loops are never contractible, so any residual edge means Stuck.
    """
    parent: dict[int, int] = {v: v for v in aps.vertices}

    def find(v: int) -> int:
        while parent[v] != v:
            v = parent[v]
        return v

    labels: dict[int, set[str]] = {v: set(aps.labels[v]) for v in aps.vertices}
    solids = dict(enumerate(aps.solids))
    pars = {i + len(aps.solids): p for i, p in enumerate(aps.pars)}
    unis = {i + len(aps.solids) + len(aps.pars): u for i, u in enumerate(aps.unis)}

    def merge(a: int, b: int, drop: str | None = None) -> None:
        ra, rb = find(a), find(b)
        lab = labels.pop(ra) | labels.pop(rb)
        parent[ra] = rb
        if drop is not None:
            lab.discard(drop)
        labels[rb] = lab

    trace: list[tuple[str, int, int]] = []

    def edge_count() -> int:
        return len(solids) + len(pars) + len(unis)

    while True:
        redexes: list[tuple[str, int]] = []
        for eid, (u, v) in solids.items():
            if find(u) != find(v):
                redexes.append(("c", eid))
        for eid, (m, l, r) in pars.items():
            if find(l) == find(r) != find(m):
                redexes.append(("p", eid))
        for eid, (b, m, x) in unis.items():
            fb, fm = find(b), find(m)
            if fb == fm:
                continue
            if all(find(v) == fb for v, lab in labels.items() if x in lab):
                redexes.append(("u", eid))
        if not redexes:
            break
        kind, eid = rng.choice(redexes) if rng is not None else redexes[0]
        trace.append((kind, len(labels), edge_count()))
        if kind == "c":
            u, v = solids.pop(eid)
            merge(u, v)
        elif kind == "p":
            m, l, _r = pars.pop(eid)
            merge(l, m)
        else:
            b, m, x = unis.pop(eid)
            merge(b, m, drop=x)

    return ContractionResult(
        success=len(labels) == 1 and edge_count() == 0,
        trace=trace,
        residual_vertices=len(labels),
        residual_edges=edge_count(),
    )


# ---------------------------------------------------------------------------
# Matching search


@dataclass
class Matching:
    pairs: dict[int, int]  # positive atom oid -> negative atom oid
    trail: list[tuple[int, int]]  # pairs in the order they were fixed
    subst: Substitution
    store: OrderStore


@dataclass
class SearchStats:
    branches: int = 0
    backtracks: int = 0
    explored: int = 0  # complete matchings produced
    unpruned_space: int = 0


def matching_space(ps: ProofStructure) -> int:
    """Size of the raw matching space: the product over predicates of n!."""
    pos = defaultdict(int)
    neg = defaultdict(int)
    for o in ps.positive_atoms():
        pos[(o.formula.pred, len(o.formula.args))] += 1
    for o in ps.negative_atoms():
        neg[(o.formula.pred, len(o.formula.args))] += 1
    if set(pos) != set(neg) or any(pos[k] != neg[k] for k in pos):
        return 0
    return math.prod(math.factorial(n) for n in pos.values())


def _wrong_side_ok(ps: ProofStructure, subst: Substitution) -> bool:
    """No universal link's eigenvariable may occur, after substitution, at a
    vertex of its own unfold tree outside the link's body subtree (the side
    its arrow points to); frontier contributions count as occurrences."""
    for l in ps.links:
        if l.kind != UNIVERSAL:
            continue
        x = l.term
        body = ps.occurrences[l.body]
        src, bpath = body.source, body.path
        for o in ps.occurrences.values():
            if o.source != src or o.path[:len(bpath)] == bpath:
                continue
            if x.name in free_eigenvariables(substitute(o.formula, subst)):
                return False
        for e in ps.links:
            if e.kind != EXISTENTIAL:
                continue
            main = ps.occurrences[e.main]
            if main.source != src or main.path[:len(bpath)] == bpath:
                continue
            active = substitute(ps.occurrences[e.actives[0]].formula, subst)
            if x.name in free_eigenvariables(active) \
                    and x.name not in free_eigenvariables(substitute(main.formula, subst)):
                return False
    return True


def _try_pair(ps: ProofStructure, pos: Occurrence, neg: Occurrence,
              subst: Substitution, store: OrderStore,
              filters: str) -> tuple[Substitution, OrderStore] | None:
    s2 = unify_atoms(pos.formula, neg.formula, subst)
    if s2 is None:
        return None
    if filters == "unify":
        return s2, store
    merged = merge_bindings(subst, s2, store)
    if merged is None:
        return None
    s3, store3 = merged
    if not _wrong_side_ok(ps, s3):
        return None
    return s3, store3


def _atom_key(ps: ProofStructure, oid: int, subst: Substitution):
    return (formula_str(substitute(ps.occurrences[oid].formula, subst)), oid)


def candidate_table(ps: ProofStructure, store: OrderStore,
                    subst: Substitution | None = None,
                    used_neg: frozenset = frozenset(),
                    remaining_pos: list[int] | None = None,
                    filters: str = "full") -> dict[int, list[int]]:
    """Per positive atom, the negative atoms of matching predicate that
    survive unification, order-store consistency and the wrong-side check."""
    subst = subst or {}
    pos_atoms = ps.positive_atoms()
    neg_atoms = ps.negative_atoms()
    if remaining_pos is not None:
        pos_atoms = [ps.occurrences[i] for i in remaining_pos]
    table: dict[int, list[int]] = {}
    for p in pos_atoms:
        cands = []
        for n in neg_atoms:
            if n.oid in used_neg:
                continue
            if n.formula.pred != p.formula.pred or len(n.formula.args) != len(p.formula.args):
                continue
            if _try_pair(ps, p, n, subst, store, filters) is not None:
                cands.append(n.oid)
        table[p.oid] = sorted(cands, key=lambda o: _atom_key(ps, o, subst))
    return table


def enumerate_matchings(ps: ProofStructure, store: OrderStore | None = None,
                        filters: str = "full",
                        stats: SearchStats | None = None):
    """Depth-first enumeration of complete, filter-consistent matchings.

    Positive atoms with a single candidate are fixed first (unit
    propagation, re-filtering after each fix); branching picks the positive
    atom with the fewest candidates, ties broken by printed atom order.
    """
    store = store if store is not None else OrderStore()
    stats = stats if stats is not None else SearchStats()
    stats.unpruned_space = matching_space(ps)

    pos = defaultdict(list)
    neg = defaultdict(int)
    for o in ps.positive_atoms():
        pos[(o.formula.pred, len(o.formula.args))].append(o.oid)
    for o in ps.negative_atoms():
        neg[(o.formula.pred, len(o.formula.args))] += 1
    if {k: len(v) for k, v in pos.items()} != dict(neg):
        return

    all_pos = [o for group in pos.values() for o in group]

    def dfs(remaining: list[int], used: frozenset, subst: Substitution,
            st: OrderStore, trail: list[tuple[int, int]]):
        if not remaining:
            stats.explored += 1
            yield Matching(dict(trail), list(trail), subst, st)
            return
        cands: dict[int, list[tuple[int, Substitution, OrderStore]]] = {}
        for p in remaining:
            po = ps.occurrences[p]
            lst = []
            for n in ps.negative_atoms():
                if n.oid in used or n.formula.pred != po.formula.pred \
                        or len(n.formula.args) != len(po.formula.args):
                    continue
                r = _try_pair(ps, po, n, subst, st, filters)
                if r is not None:
                    lst.append((n.oid, r[0], r[1]))
            if not lst:
                stats.backtracks += 1
                return
            lst.sort(key=lambda it: _atom_key(ps, it[0], subst))
            cands[p] = lst

        units = [p for p in remaining if len(cands[p]) == 1]
        if units:
            p = min(units, key=lambda o: _atom_key(ps, o, subst))
            n, s2, st2 = cands[p][0]
            rest = [q for q in remaining if q != p]
            yield from dfs(rest, used | {n}, s2, st2, trail + [(p, n)])
            return

        p = min(remaining, key=lambda o: (len(cands[o]), _atom_key(ps, o, subst)))
        stats.branches += 1
        rest = [q for q in remaining if q != p]
        for n, s2, st2 in cands[p]:
            yield from dfs(rest, used | {n}, s2, st2, trail + [(p, n)])

    yield from dfs(sorted(all_pos), frozenset(), {}, store, [])


@dataclass
class NetResult:
    matching: Matching
    contraction: ContractionResult


def net_search(seq: Sequent, decorations=None, store: OrderStore | None = None,
               first_only: bool = False,
               filters: str = "full") -> tuple[list[NetResult], SearchStats]:
    """Full pipeline: unfold, enumerate matchings, contract each candidate.
    Returns the matchings whose abstract structure contracts to a point."""
    ps = unfold(seq, decorations)
    stats = SearchStats()
    nets: list[NetResult] = []
    for m in enumerate_matchings(ps, store, filters=filters, stats=stats):
        aps = abstract(ps, m.pairs, m.subst)
        res = contract(aps)
        if res.success:
            nets.append(NetResult(m, res))
            if first_only:
                break
    return nets, stats


def prove_net(seq: Sequent, decorations=None,
              store: OrderStore | None = None) -> list[NetResult]:
    nets, _stats = net_search(seq, decorations, store)
    return nets


# ---------------------------------------------------------------------------
# DOT output


def _esc(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def structure_dot(ps: ProofStructure, matching: dict[int, int] | None = None,
                  subst: Substitution | None = None) -> str:
    """Graphviz rendering: solid edges plain, par pairs dashed, universal
    edges dashed with an arrowhead and eigenvariable label."""
    subst = subst or {}
    vmap = _vertex_map(ps, matching)
    lines = ["graph proof_structure {", "  node [shape=plaintext];"]
    shown = {}
    for o in ps.occurrences.values():
        v = vmap[o.oid]
        shown.setdefault(v, []).append(o)
    for v, occs in sorted(shown.items()):
        label = " = ".join(
            sorted({formula_str(substitute(o.formula, subst)) for o in occs})
        )
        lines.append(f'  n{v} [label="{_esc(label)}"];')
    for l in ps.links:
        if l.kind == TENSOR:
            c = vmap[l.conclusions[0]]
            for p in l.premisses:
                lines.append(f"  n{vmap[p]} -- n{c};")
        elif l.kind == EXISTENTIAL:
            lines.append(f"  n{vmap[l.premisses[0]]} -- n{vmap[l.conclusions[0]]};")
        elif l.kind == PAR:
            for a in l.actives:
                lines.append(f"  n{vmap[a]} -- n{vmap[l.main]} [style=dashed];")
        else:
            lines.append(
                f'  n{vmap[l.body]} -- n{vmap[l.main]} '
                f'[style=dashed, dir=forward, label="{_esc(l.term.name)}"];'
            )
    lines.append("}")
    return "\n".join(lines) + "\n"


def abstract_dot(aps: AbstractProofStructure) -> str:
    lines = ["graph abstract_proof_structure {", "  node [shape=plaintext];"]
    for v in aps.vertices:
        label = "{" + ",".join(sorted(aps.labels[v])) + "}"
        lines.append(f'  n{v} [label="{_esc(label)}"];')
    for u, v in aps.solids:
        lines.append(f"  n{u} -- n{v};")
    for m, l, r in aps.pars:
        lines.append(f"  n{l} -- n{m} [style=dashed];")
        lines.append(f"  n{r} -- n{m} [style=dashed];")
    for b, m, x in aps.unis:
        lines.append(f'  n{b} -- n{m} [style=dashed, dir=forward, label="{_esc(x)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
