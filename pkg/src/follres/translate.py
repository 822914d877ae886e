"""Compositional translation of categorial formulas into decorated logical
formulas.

Every formula occurrence carries a tuple of string positions (its segment
endpoints).  Translation walks the categorial tree, threading position
tuples per the connective's pattern: the product quantifies the positions
its operands share existentially, each division quantifies the positions it
shares with the result universally.  Alongside the formula we accumulate
the order facts the decorated sequent must satisfy: the internal chain of
every node tuple plus the pattern's explicitly required facts.

Plain Lambek divisions extend to operands occupying several segments: the
argument attaches at the outermost edge of the first (for ``\\``) or last
(for ``/``) segment, which is what a verb-phrase ellipsis type needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .order import Inconsistent, OrderFact, OrderStore
from .patterns import LAMBEK, ROLE_OVER, ROLE_PRODUCT, ROLE_UNDER, schema
from .terms import (
    Atom,
    CatAtom,
    CatFormula,
    Eigen,
    Exists,
    Forall,
    Formula,
    Gap,
    Limp,
    Meta,
    NameSupply,
    Over,
    Pos,
    Prod,
    Sequent,
    Tensor,
    Term,
    Under,
    Var,
    cat_str,
)


class TranslationError(ValueError):
    pass


class UnknownWordError(TranslationError):
    pass


@dataclass(frozen=True)
class LexEntry:
    word: str
    cat: CatFormula


@dataclass
class DecoratedFormula:
    """A translated formula, the position tuple of every subformula
    occurrence (keyed by tree path, steps 'l'/'r'/'b'), and the accumulated
    order facts."""

    mill: Formula
    node_tuples: dict[tuple[str, ...], tuple[Term, ...]] = field(default_factory=dict)
    facts: list[OrderFact] = field(default_factory=list)


# vp is ordinary shorthand; expanding it before translation keeps the
# unfolded atoms down at np/s.
ABBREVIATIONS: dict[str, CatFormula] = {
    "vp": Under(LAMBEK, CatAtom("np"), CatAtom("s")),
}


def expand_abbreviations(cat: CatFormula) -> CatFormula:
    if isinstance(cat, CatAtom):
        expansion = ABBREVIATIONS.get(cat.name)
        return expand_abbreviations(expansion) if expansion is not None else cat
    if isinstance(cat, (Prod, Under, Over)):
        kind = type(cat)
        return kind(cat.pattern, expand_abbreviations(cat.left), expand_abbreviations(cat.right))
    if isinstance(cat, Gap):
        return Gap(expand_abbreviations(cat.gap), expand_abbreviations(cat.result), cat.scoped)
    raise TypeError(f"not a categorial formula: {cat!r}")


class _Ctx:
    def __init__(self, supply: NameSupply):
        self.supply = supply
        self.kinds: dict[str, str] = {}
        self.facts: list[OrderFact] = []

    def fresh(self, destined_meta: bool) -> str:
        name = self.supply.meta_style() if destined_meta else self.supply.eigen_style()
        self.kinds[name] = "meta" if destined_meta else "eigen"
        return name

    def fact_term(self, t: Term) -> Term:
        if isinstance(t, Var):
            if self.kinds.get(t.name) == "eigen":
                return Eigen(t.name)
            return Meta(t.name)
        return t

    def add_chain(self, span: tuple[Term, ...]):
        for a, b in zip(span, span[1:]):
            if a != b:
                self.facts.append(OrderFact(self.fact_term(a), self.fact_term(b)))

    def add_fact(self, a: Term, b: Term):
        self.facts.append(OrderFact(self.fact_term(a), self.fact_term(b)))

    def tuple_terms(self, span: tuple[Term, ...]) -> tuple[Term, ...]:
        return tuple(self.fact_term(t) for t in span)


def _dedup(facts: list[OrderFact]) -> list[OrderFact]:
    seen = set()
    out = []
    for f in facts:
        key = (f.left, f.right, f.strict)
        if key not in seen:
            seen.add(key)
            out.append(f)
    return out


def _shift(paths: dict, step: str) -> dict:
    return {(step,) + path: span for path, span in paths.items()}


def _wrap_quantifiers(kind, names: list[str], mill: Formula, paths: dict) -> tuple[Formula, dict]:
    for name in reversed(names):
        mill = kind(name, mill)
        paths = _shift(paths, "b")
    return mill, paths


def _translate(cat: CatFormula, span: tuple[Term, ...], pol: int, ctx: _Ctx) -> tuple[Formula, dict]:
    if isinstance(cat, CatAtom):
        ctx.add_chain(span)
        return Atom(cat.name, span), {(): span}

    if isinstance(cat, Gap):
        return _translate_gap(cat, span, pol, ctx)

    if len(span) % 2 != 0 or not span:
        raise TranslationError(f"span for {cat_str(cat)} must have even, positive length")

    sch = schema(cat.pattern)
    own = {Prod: sch.tuple_c, Under: sch.tuple_b, Over: sch.tuple_a}[type(cat)]

    if len(span) != len(own):
        if cat.pattern == LAMBEK and not isinstance(cat, Prod) and len(span) > 2:
            return _translate_wide_lambek(cat, span, pol, ctx)
        raise TranslationError(
            f"{cat_str(cat)} needs a {len(own)}-position span, got {len(span)}"
        )

    ctx.add_chain(span)
    mapping: dict[int, Term] = dict(zip(own, span))
    if isinstance(cat, Prod):
        quant_indices, quant_kind, role = sorted(sch.exist_vars), Exists, ROLE_PRODUCT
        destined_meta = pol > 0
    elif isinstance(cat, Under):
        quant_indices, quant_kind, role = sorted(sch.under_vars), Forall, ROLE_UNDER
        destined_meta = pol < 0
    else:
        quant_indices, quant_kind, role = sorted(sch.over_vars), Forall, ROLE_OVER
        destined_meta = pol < 0

    names = []
    for idx in quant_indices:
        name = ctx.fresh(destined_meta)
        mapping[idx] = Var(name)
        names.append(name)

    span_a = tuple(mapping[i] for i in sch.tuple_a)
    span_b = tuple(mapping[i] for i in sch.tuple_b)
    span_c = tuple(mapping[i] for i in sch.tuple_c)

    for i, j in sch.required_facts[role]:
        ctx.add_fact(mapping[i], mapping[j])

    if isinstance(cat, Prod):
        left_mill, left_paths = _translate(cat.left, span_a, pol, ctx)
        right_mill, right_paths = _translate(cat.right, span_b, pol, ctx)
        core = Tensor(left_mill, right_mill)
    elif isinstance(cat, Under):
        left_mill, left_paths = _translate(cat.left, span_a, -pol, ctx)
        right_mill, right_paths = _translate(cat.right, span_c, pol, ctx)
        core = Limp(left_mill, right_mill)
    else:
        right_mill, right_paths = _translate(cat.right, span_b, -pol, ctx)
        left_mill, left_paths = _translate(cat.left, span_c, pol, ctx)
        core = Limp(right_mill, left_mill)

    if isinstance(cat, Over):
        paths = {**_shift(right_paths, "l"), **_shift(left_paths, "r")}
    else:
        paths = {**_shift(left_paths, "l"), **_shift(right_paths, "r")}
    mill, paths = _wrap_quantifiers(quant_kind, names, core, paths)
    paths[()] = span
    return mill, paths


def _translate_wide_lambek(cat, span: tuple[Term, ...], pol: int, ctx: _Ctx):
    """Plain \\ or / whose result occupies several segments: the argument
    must be a single segment and attaches at the outer edge."""
    ctx.add_chain(span)
    destined_meta = pol < 0
    name = ctx.fresh(destined_meta)
    if isinstance(cat, Under):
        arg_span = (Var(name), span[0])
        res_span = (Var(name),) + tuple(span[1:])
        arg_mill, arg_paths = _translate(cat.left, arg_span, -pol, ctx)
        res_mill, res_paths = _translate(cat.right, res_span, pol, ctx)
    else:
        arg_span = (span[-1], Var(name))
        res_span = tuple(span[:-1]) + (Var(name),)
        arg_mill, arg_paths = _translate(cat.right, arg_span, -pol, ctx)
        res_mill, res_paths = _translate(cat.left, res_span, pol, ctx)
    core = Limp(arg_mill, res_mill)
    paths = {**_shift(arg_paths, "l"), **_shift(res_paths, "r")}
    mill, paths = _wrap_quantifiers(Forall, [name], core, paths)
    paths[()] = span
    return mill, paths


def _translate_gap(cat: Gap, span: tuple[Term, ...], pol: int, ctx: _Ctx):
    if len(span) != 2:
        raise TranslationError("a gap formula occupies a single segment")
    ctx.add_chain(span)
    if cat.scoped:
        name = ctx.fresh(destined_meta=pol > 0)
        gap_mill, gap_paths = _translate(cat.gap, (Var(name), Var(name)), -pol, ctx)
        res_mill, res_paths = _translate(cat.result, span, pol, ctx)
        core = Limp(gap_mill, res_mill)
        paths = {**_shift(gap_paths, "l"), **_shift(res_paths, "r")}
        mill, paths = _wrap_quantifiers(Exists, [name], core, paths)
    else:
        name = ctx.fresh(destined_meta=pol > 0)
        gap_mill, gap_paths = _translate(cat.gap, (Var(name), Var(name)), -pol, ctx)
        gap_mill, gap_paths = _wrap_quantifiers(Forall, [name], gap_mill, gap_paths)
        res_mill, res_paths = _translate(cat.result, span, pol, ctx)
        mill = Limp(gap_mill, res_mill)
        paths = {**_shift(gap_paths, "l"), **_shift(res_paths, "r")}
    paths[()] = span
    return mill, paths


def translate(
    cat: CatFormula,
    span: tuple[Term, ...],
    polarity: int = -1,
    supply: NameSupply | None = None,
) -> DecoratedFormula:
    """Translate a categorial formula at the given position tuple.

    Negative polarity (the default) is the antecedent orientation used for
    lexical entries; the goal formula is translated positively.
    """
    ctx = _Ctx(supply if supply is not None else NameSupply())
    mill, paths = _translate(expand_abbreviations(cat), tuple(span), polarity, ctx)
    return DecoratedFormula(mill=mill, node_tuples=paths, facts=_dedup(ctx.facts))


def translate_gap(cat: Gap, span: tuple[Term, ...], polarity: int = -1,
                  supply: NameSupply | None = None) -> DecoratedFormula:
    """Translate a gap formula (empty-string argument) at a two-position span."""
    ctx = _Ctx(supply if supply is not None else NameSupply())
    gap = Gap(expand_abbreviations(cat.gap), expand_abbreviations(cat.result), cat.scoped)
    mill, paths = _translate_gap(gap, tuple(span), polarity, ctx)
    return DecoratedFormula(mill=mill, node_tuples=paths, facts=_dedup(ctx.facts))


@dataclass
class SentenceInstantiation:
    """A sentence turned into a decorated sequent: one antecedent formula
    per word at span (i-1, i), the goal at (0, n), and the order store
    seeded with the strict word chain plus all accumulated facts."""

    words: list[str]
    sequent: Sequent
    store: OrderStore
    decorations: list[DecoratedFormula]
    goal_decoration: DecoratedFormula


def lexicon_entries(lex, word: str) -> list[CatFormula]:
    cats = [e.cat if isinstance(e, LexEntry) else e[1]
            for e in lex
            if (e.word if isinstance(e, LexEntry) else e[0]) == word]
    return cats


def instantiate_sentence(lex, words, goal, senses=None) -> SentenceInstantiation:
    """Build the decorated sequent for one reading of a sentence.

    ``senses`` picks an entry per word for lexically ambiguous words; when
    omitted, every word must have exactly one entry.
    """
    words = list(words)
    cats: list[CatFormula] = []
    for i, word in enumerate(words):
        options = lexicon_entries(lex, word)
        if not options:
            raise UnknownWordError(f"no lexicon entry for {word!r}")
        if senses is not None:
            cats.append(options[senses[i]])
        elif len(options) == 1:
            cats.append(options[0])
        else:
            raise TranslationError(
                f"{word!r} is ambiguous ({len(options)} entries); pick a sense"
            )

    supply = NameSupply()
    n = len(words)
    decorations = []
    antecedent = []
    for i, cat in enumerate(cats, start=1):
        dec = translate(cat, (Pos(i - 1), Pos(i)), polarity=-1, supply=supply)
        decorations.append(dec)
        antecedent.append(dec.mill)

    if isinstance(goal, str):
        goal = CatAtom(goal)
    if isinstance(goal, Atom):
        goal_dec = DecoratedFormula(mill=goal, node_tuples={(): goal.args}, facts=[])
        goal_dec.facts = [OrderFact(a, b) for a, b in zip(goal.args, goal.args[1:]) if a != b]
    else:
        goal_dec = translate(goal, (Pos(0), Pos(n)), polarity=1, supply=supply)

    store = OrderStore()
    for i in range(n):
        store, eqs = store.assert_order(Pos(i), Pos(i + 1), strict=True)
        assert not eqs
    for dec in decorations + [goal_dec]:
        for fact in dec.facts:
            try:
                store, eqs = store.assert_order(fact.left, fact.right, fact.strict)
            except Inconsistent as exc:
                raise TranslationError(f"lexicon order facts are inconsistent: {exc}")
            if eqs:
                raise TranslationError(f"lexicon order facts force equalities: {eqs}")

    seq = Sequent(tuple(antecedent), goal_dec.mill)
    return SentenceInstantiation(
        words=words,
        sequent=seq,
        store=store,
        decorations=decorations,
        goal_decoration=goal_dec,
    )


def sentence_readings(lex, words, goal):
    """All sense combinations of an ambiguous sentence, lazily."""
    import itertools

    counts = []
    for word in words:
        options = lexicon_entries(lex, word)
        if not options:
            raise UnknownWordError(f"no lexicon entry for {word!r}")
        counts.append(range(len(options)))
    for combo in itertools.product(*counts):
        yield instantiate_sentence(lex, words, goal, senses=tuple(combo))
