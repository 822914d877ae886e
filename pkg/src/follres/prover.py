"""Backward-chaining cut-free sequent prover with metavariables.

Quantifier instantiation is delayed: instantiable quantifiers introduce
fresh metavariables resolved by unification at the axioms, and the
quantifier side conditions are enforced through creation levels (a
metavariable may only be bound to an eigenvariable created before it).
Context splitting for the two-premise rules is lazy: a subproof receives
every available resource and hands the unused ones back.

Invertible rules (left tensor, right implication, the eigenvariable
quantifier rules) are applied eagerly; the remaining choices (axiom
selection, left implication, instantiable quantifiers, the splits) are
explored depth-first with full backtracking, so the search is a decision
procedure on this fragment.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator

from .order import Inconsistent, OrderFact, OrderStore, merge_bindings
from .patterns import Pattern, schema
from .terms import (
    Atom,
    CatAtom,
    Eigen,
    Exists,
    Forall,
    Formula,
    Limp,
    Meta,
    NameSupply,
    Over,
    Pos,
    Prod,
    Sequent,
    Substitution,
    Tensor,
    Under,
    LevelCounter,
    formula_str,
    free_eigenvariables,
    instantiate,
    substitute,
    unify_atoms,
    walk,
)
from .translate import translate


@dataclass
class Derivation:
    """One rule instance: its conclusion, premisses, and for axioms the
    bindings the closing unification added (quantifier rules record the
    instantiating term under the bound variable's name)."""

    rule: str
    conclusion: Sequent
    premisses: tuple["Derivation", ...] = ()
    unifier: Substitution = field(default_factory=dict)


class _Attempt:
    def __init__(self):
        self.levels = LevelCounter()
        self._rids = itertools.count()

    def new_rid(self) -> int:
        return next(self._rids)


def _scope_ok(subst: Substitution, att: _Attempt) -> bool:
    """Every bound metavariable resolving to an eigenvariable must have been
    created after it."""
    levels = att.levels.levels
    for name in subst:
        t = walk(Meta(name), subst)
        if isinstance(t, Eigen):
            mlvl = levels.get(name)
            elvl = levels.get(t.name, t.level)
            if mlvl is None or elvl >= mlvl:
                return False
    return True


Resources = tuple[tuple[int, Formula], ...]
_SearchResult = tuple[Substitution, OrderStore, frozenset, Derivation]


def _conclusion(inp: Resources, leftover: frozenset, goal: Formula) -> Sequent:
    return Sequent(tuple(f for r, f in inp if r not in leftover), goal)


def _search(inp: Resources, goal: Formula, subst: Substitution,
            store: OrderStore, att: _Attempt) -> Iterator[_SearchResult]:
    # Invertible goal rules first: eigenvariables are created as early as
    # possible, which only widens what later metavariables may bind.
    if isinstance(goal, Forall):
        e = att.levels.make_eigen(goal.var)
        body = instantiate(goal.body, goal.var, e)
        for s, st, lo, d in _search(inp, body, subst, store, att):
            yield s, st, lo, Derivation("Rforall", _conclusion(inp, lo, goal), (d,), {goal.var: e})
        return
    if isinstance(goal, Limp):
        rid = att.new_rid()
        inner = inp + ((rid, goal.left),)
        for s, st, lo, d in _search(inner, goal.right, subst, store, att):
            if rid in lo:  # the hypothesis may not escape its implication
                continue
            yield s, st, lo, Derivation("R-o", _conclusion(inp, lo, goal), (d,))
        return

    # Invertible resource rules.
    for i, (rid, f) in enumerate(inp):
        rest = inp[:i] + inp[i + 1:]
        if isinstance(f, Tensor):
            r1, r2 = att.new_rid(), att.new_rid()
            inner = rest + ((r1, f.left), (r2, f.right))
            for s, st, lo, d in _search(inner, goal, subst, store, att):
                if r1 in lo or r2 in lo:
                    continue
                yield s, st, lo, Derivation("L*", _conclusion(inp, lo, goal), (d,))
            return
        if isinstance(f, Exists):
            e = att.levels.make_eigen(f.var)
            r1 = att.new_rid()
            inner = rest + ((r1, instantiate(f.body, f.var, e)),)
            for s, st, lo, d in _search(inner, goal, subst, store, att):
                if r1 in lo:
                    continue
                yield s, st, lo, Derivation("Lexists", _conclusion(inp, lo, goal), (d,), {f.var: e})
            return

    # Non-invertible choices, tried depth-first.
    if isinstance(goal, Atom):
        for i, (rid, f) in enumerate(inp):
            if not isinstance(f, Atom):
                continue
            s2 = unify_atoms(f, goal, subst)
            if s2 is None:
                continue
            merged = merge_bindings(subst, s2, store)
            if merged is None:
                continue
            s3, st3 = merged
            if not _scope_ok(s3, att):
                continue
            delta = {n: t for n, t in s3.items() if n not in subst}
            lo = frozenset(r for r, _ in inp if r != rid)
            yield s3, st3, lo, Derivation("Ax", Sequent((f,), goal), (), delta)

    if isinstance(goal, Tensor):
        for s1, st1, lo1, d1 in _search(inp, goal.left, subst, store, att):
            sub_inp = tuple((r, f) for r, f in inp if r in lo1)
            for s2, st2, lo2, d2 in _search(sub_inp, goal.right, s1, st1, att):
                yield s2, st2, lo2, Derivation("R*", _conclusion(inp, lo2, goal), (d1, d2))

    if isinstance(goal, Exists):
        m = att.levels.make_meta(goal.var)
        body = instantiate(goal.body, goal.var, m)
        for s, st, lo, d in _search(inp, body, subst, store, att):
            yield s, st, lo, Derivation("Rexists", _conclusion(inp, lo, goal), (d,), {goal.var: m})

    for i, (rid, f) in enumerate(inp):
        rest = inp[:i] + inp[i + 1:]
        if isinstance(f, Limp):
            for s1, st1, lo1, d1 in _search(rest, f.left, subst, store, att):
                bid = att.new_rid()
                cont = tuple((r, g) for r, g in rest if r in lo1) + ((bid, f.right),)
                for s2, st2, lo2, d2 in _search(cont, goal, s1, st1, att):
                    if bid in lo2:
                        continue
                    yield s2, st2, lo2, Derivation("L-o", _conclusion(inp, lo2, goal), (d1, d2))
        elif isinstance(f, Forall):
            m = att.levels.make_meta(f.var)
            bid = att.new_rid()
            cont = rest + ((bid, instantiate(f.body, f.var, m)),)
            for s, st, lo, d in _search(cont, goal, subst, store, att):
                if bid in lo:
                    continue
                yield s, st, lo, Derivation("Lforall", _conclusion(inp, lo, goal), (d,), {f.var: m})


def prove_all(seq: Sequent, store: OrderStore | None = None,
              limit: int | None = None) -> Iterator[tuple[Derivation, Substitution]]:
    """All derivations of the sequent (up to search order), lazily."""
    att = _Attempt()
    store = store if store is not None else OrderStore()
    inp: Resources = tuple((att.new_rid(), f) for f in seq.antecedent)
    n = 0
    for s, _st, lo, d in _search(inp, seq.succedent, {}, store, att):
        if lo:
            continue
        yield d, s
        n += 1
        if limit is not None and n >= limit:
            return


def prove(seq: Sequent, store: OrderStore | None = None) -> Derivation | None:
    """First derivation whose unifier respects the quantifier side
    conditions and keeps the order store consistent, or None."""
    for d, _s in prove_all(seq, store, limit=1):
        return d
    return None


# ---------------------------------------------------------------------------
# Derivation validation (independent re-check of every rule instance)


class ValidationError(AssertionError):
    pass


def derivation_substitution(d: Derivation) -> Substitution:
    """The composed substitution: the union of all axiom unifiers."""
    s: Substitution = {}
    stack = [d]
    while stack:
        node = stack.pop()
        if node.rule == "Ax":
            s.update(node.unifier)
        stack.extend(node.premisses)
    return s


def validate_derivation(d: Derivation) -> bool:
    """Re-check the derivation rule by rule with its unifier applied.
    Raises ValidationError with a diagnostic on the first bad node."""
    s = derivation_substitution(d)

    def norm(f: Formula) -> Formula:
        return substitute(f, s)

    def ant(seq: Sequent) -> Counter:
        return Counter(norm(f) for f in seq.antecedent)

    def fail(node, msg):
        raise ValidationError(f"{node.rule}: {msg}")

    def check(node: Derivation):
        c = node.conclusion
        prems = node.premisses
        if node.rule == "Ax":
            if len(c.antecedent) != 1 or norm(c.antecedent[0]) != norm(c.succedent):
                fail(node, "axiom formulas differ after substitution")
        elif node.rule == "L*":
            (p,) = prems
            tens = [f for f in c.antecedent if isinstance(f, Tensor)]
            ok = False
            for f in tens:
                expect = ant(c) - Counter([norm(f)]) + Counter([norm(f.left), norm(f.right)])
                if ant(p.conclusion) == expect and norm(p.conclusion.succedent) == norm(c.succedent):
                    ok = True
            if not ok:
                fail(node, "premiss does not split a tensor resource")
        elif node.rule == "R*":
            p1, p2 = prems
            if not isinstance(c.succedent, Tensor):
                fail(node, "succedent is not a tensor")
            if norm(p1.conclusion.succedent) != norm(c.succedent.left):
                fail(node, "left premiss goal mismatch")
            if norm(p2.conclusion.succedent) != norm(c.succedent.right):
                fail(node, "right premiss goal mismatch")
            if ant(p1.conclusion) + ant(p2.conclusion) != ant(c):
                fail(node, "context split is not a partition")
        elif node.rule == "R-o":
            (p,) = prems
            if not isinstance(c.succedent, Limp):
                fail(node, "succedent is not an implication")
            expect = ant(c) + Counter([norm(c.succedent.left)])
            if ant(p.conclusion) != expect or norm(p.conclusion.succedent) != norm(c.succedent.right):
                fail(node, "premiss does not add the hypothesis")
        elif node.rule == "L-o":
            p1, p2 = prems
            imps = [f for f in c.antecedent if isinstance(f, Limp)]
            ok = False
            for f in imps:
                if norm(p1.conclusion.succedent) != norm(f.left):
                    continue
                combined = ant(p1.conclusion) + ant(p2.conclusion) \
                    - Counter([norm(f.right)]) + Counter([norm(f)])
                if combined == ant(c) and Counter([norm(f.right)]) <= ant(p2.conclusion) \
                        and norm(p2.conclusion.succedent) == norm(c.succedent):
                    ok = True
            if not ok:
                fail(node, "premisses do not decompose an implication resource")
        elif node.rule in ("Rforall", "Lexists"):
            (p,) = prems
            if node.rule == "Rforall":
                q = c.succedent
                if not isinstance(q, Forall):
                    fail(node, "succedent is not universal")
                rest_same = ant(p.conclusion) == ant(c)
                inst_f = norm(p.conclusion.succedent)
            else:
                q = next((f for f in c.antecedent if isinstance(f, Exists)), None)
                if q is None:
                    fail(node, "no existential resource")
                rest_same = ant(p.conclusion) + Counter([norm(q)]) \
                    == ant(c) + Counter([norm(instantiate(q.body, q.var, node.unifier[q.var]))])
                inst_f = None
            e = node.unifier.get(q.var)
            if not isinstance(e, Eigen):
                fail(node, "no eigenvariable recorded")
            if inst_f is not None and inst_f != norm(instantiate(q.body, q.var, e)):
                fail(node, "premiss is not the instantiated body")
            if not rest_same:
                fail(node, "context changed")
            others = list(c.antecedent) + ([c.succedent] if node.rule == "Lexists" else [])
            if node.rule == "Rforall":
                others = list(c.antecedent)
            for g in others:
                if e.name in free_eigenvariables(norm(g)):
                    fail(node, f"eigenvariable {e.name} occurs free in the context")
        elif node.rule in ("Lforall", "Rexists"):
            (p,) = prems
            if node.rule == "Lforall":
                q = next((f for f in c.antecedent
                          if isinstance(f, Forall) and f.var in node.unifier), None)
                if q is None:
                    fail(node, "no matching universal resource")
                inst = norm(instantiate(q.body, q.var, node.unifier[q.var]))
                expect = ant(c) - Counter([norm(q)]) + Counter([inst])
                if ant(p.conclusion) != expect or norm(p.conclusion.succedent) != norm(c.succedent):
                    fail(node, "premiss does not instantiate the resource")
            else:
                q = c.succedent
                if not isinstance(q, Exists):
                    fail(node, "succedent is not existential")
                inst = norm(instantiate(q.body, q.var, node.unifier[q.var]))
                if ant(p.conclusion) != ant(c) or norm(p.conclusion.succedent) != inst:
                    fail(node, "premiss is not the instantiated goal")
        else:
            fail(node, f"unknown rule {node.rule}")
        for p in prems:
            check(p)

    check(d)
    return True


# ---------------------------------------------------------------------------
# Residuation test suite


@dataclass(frozen=True)
class SuiteEntry:
    label: str
    sequent: Sequent
    store: OrderStore


def _closed_implication(src: str, dst: str, arity: int, supply: NameSupply) -> Formula:
    names = [supply.claim(f"v{i}") for i in range(arity)]
    from .terms import Var

    args = tuple(Var(n) for n in names)
    f: Formula = Limp(Atom(src, args), Atom(dst, args))
    for n in reversed(names):
        f = Forall(n, f)
    return f


def residuation_suite(pattern: Pattern) -> list[SuiteEntry]:
    """Application, co-application and monotonicity sequents for one
    connective family, all expected derivable (with that family's required
    order facts seeded in the store)."""
    sch = schema(pattern)
    span_a = tuple(Pos(i) for i in sch.tuple_a)
    span_b = tuple(Pos(i) for i in sch.tuple_b)
    span_c = tuple(Pos(i) for i in sch.tuple_c)
    a_, b_, c_ = CatAtom("pa"), CatAtom("pb"), CatAtom("pc")
    a2_, b2_, c2_ = CatAtom("qa"), CatAtom("qb"), CatAtom("qc")

    def seeded_store() -> OrderStore:
        st = OrderStore()
        for role in sch.required_facts:
            for i, j in sch.required_facts[role]:
                st, _ = st.assert_order(Pos(i), Pos(j))
        return st

    def seq(antecedent_cats, goal_cat, spans_ant, span_goal) -> Sequent:
        supply = NameSupply()
        ant = [
            translate(cat, span, polarity=-1, supply=supply).mill
            for cat, span in zip(antecedent_cats, spans_ant)
        ]
        goal = translate(goal_cat, span_goal, polarity=1, supply=supply).mill
        return Sequent(tuple(ant), goal)

    entries = []
    entries.append(SuiteEntry(
        "application-under",
        seq([Prod(pattern, a_, Under(pattern, a_, c_))], c_, [span_c], span_c),
        seeded_store()))
    entries.append(SuiteEntry(
        "application-over",
        seq([Prod(pattern, Over(pattern, c_, b_), b_)], c_, [span_c], span_c),
        seeded_store()))
    entries.append(SuiteEntry(
        "coapplication-under",
        seq([b_], Under(pattern, a_, Prod(pattern, a_, b_)), [span_b], span_b),
        seeded_store()))
    entries.append(SuiteEntry(
        "coapplication-over",
        seq([a_], Over(pattern, Prod(pattern, a_, b_), b_), [span_a], span_a),
        seeded_store()))

    def mono(label, lhs_cat, rhs_cat, span, prem_pairs):
        supply = NameSupply()
        prems = [
            _closed_implication(src, dst, arity, supply)
            for src, dst, arity in prem_pairs
        ]
        lhs = translate(lhs_cat, span, polarity=-1, supply=supply).mill
        goal = translate(rhs_cat, span, polarity=1, supply=supply).mill
        return SuiteEntry(label, Sequent(tuple(prems) + (lhs,), goal), seeded_store())

    na, nb, nc = len(span_a), len(span_b), len(span_c)
    entries.append(mono(
        "monotonicity-product",
        Prod(pattern, a_, b_), Prod(pattern, a2_, b2_), span_c,
        [("pa", "qa", na), ("pb", "qb", nb)]))
    entries.append(mono(
        "monotonicity-under",
        Under(pattern, a2_, c_), Under(pattern, a_, c2_), span_b,
        [("pa", "qa", na), ("pc", "qc", nc)]))
    entries.append(mono(
        "monotonicity-over",
        Over(pattern, c_, b2_), Over(pattern, c2_, b_), span_a,
        [("pb", "qb", nb), ("pc", "qc", nc)]))
    return entries
