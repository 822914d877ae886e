"""Text grammar shared by the CLI and lexicon files.

Logical formulas:  atoms ``p(t1,...,tn)`` or bare ``p``; tensor ``*``;
implication ``-o``; quantifiers ``forall x.`` / ``exists x.``.  Categorial
formulas: atoms, ``\\``, ``/``, ``*`` with an optional pattern index such as
``\\[a1ab]``, and gaps ``C |> A`` (scoped) / ``C |>! A`` (naive).  Binary
operators require explicit parentheses except for a single top-level
occurrence; a quantifier body is the next unit, so write
``forall x.(a * b(x))`` for a compound body.

Sequents are ``F1, F2 |- G``; order facts ``a<=b`` / ``a<b``, comma
separated; lexicon files hold ``word := formula`` lines with ``#`` comments.

Integer tokens denote string positions.  Free identifiers in a logical
formula denote rigid constants; binders are renamed apart at parse time so
every bound name in a parse result is unique.
"""

from __future__ import annotations

import re

from .order import OrderFact
from .patterns import LAMBEK, Pattern, PatternError
from .terms import (
    Atom,
    CatAtom,
    CatFormula,
    Const,
    Exists,
    Forall,
    Formula,
    Gap,
    Limp,
    Over,
    Pos,
    Prod,
    Sequent,
    Tensor,
    Term,
    Under,
    Var,
)


class ParseError(ValueError):
    pass


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<lpar>\()|(?P<rpar>\))|(?P<lbrack>\[)|(?P<rbrack>\])"
    r"|(?P<turnstile>\|-)|(?P<gapnaive>\|>!)|(?P<gap>\|>)"
    r"|(?P<limp>-o)|(?P<tensor>\*)|(?P<under>\\)|(?P<over>/)"
    r"|(?P<comma>,)|(?P<dot>\.)|(?P<leq><=)|(?P<lt><)"
    r"|(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_']*))"
)


def tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            rest = text[pos:].strip()
            if not rest:
                break
            raise ParseError(f"cannot tokenize {rest[:20]!r}")
        pos = m.end()
        kind = m.lastgroup
        tokens.append((kind, m.group(kind)))
    return tokens


class _Tokens:
    def __init__(self, tokens: list[tuple[str, str]]):
        self.toks = tokens
        self.i = 0

    def peek(self) -> tuple[str, str] | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self) -> tuple[str, str]:
        if self.i >= len(self.toks):
            raise ParseError("unexpected end of input")
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind: str) -> str:
        k, v = self.next()
        if k != kind:
            raise ParseError(f"expected {kind}, got {v!r}")
        return v

    def at_end(self) -> bool:
        return self.i >= len(self.toks)


# ---------------------------------------------------------------------------
# Logical formulas


class _MillParser:
    def __init__(self, tokens: _Tokens):
        self.ts = tokens
        self.bound_used: set[str] = set()

    def rename(self, name: str) -> str:
        while name in self.bound_used:
            name += "'"
        self.bound_used.add(name)
        return name

    def parse_formula(self) -> Formula:
        scope: dict[str, str] = {}
        return self._expr(scope)

    def _expr(self, scope) -> Formula:
        left = self._unit(scope)
        nxt = self.ts.peek()
        if nxt and nxt[0] in ("tensor", "limp"):
            op = self.ts.next()[0]
            right = self._unit(scope)
            after = self.ts.peek()
            if after and after[0] in ("tensor", "limp"):
                raise ParseError("chained binary operators need parentheses")
            return Tensor(left, right) if op == "tensor" else Limp(left, right)
        return left

    def _unit(self, scope) -> Formula:
        kind, value = self.ts.next()
        if kind == "lpar":
            f = self._expr(scope)
            self.ts.expect("rpar")
            return f
        if kind == "ident" and value in ("forall", "exists"):
            var = self.ts.expect("ident")
            self.ts.expect("dot")
            fresh = self.rename(var)
            inner = dict(scope)
            inner[var] = fresh
            body = self._unit(inner)
            return Forall(fresh, body) if value == "forall" else Exists(fresh, body)
        if kind == "ident":
            return self._atom(value, scope)
        raise ParseError(f"unexpected token {value!r}")

    def _atom(self, pred: str, scope) -> Atom:
        nxt = self.ts.peek()
        if not (nxt and nxt[0] == "lpar"):
            return Atom(pred, ())
        self.ts.next()
        args: list[Term] = []
        if self.ts.peek() and self.ts.peek()[0] != "rpar":
            while True:
                args.append(self._term(scope))
                k, _ = self.ts.next()
                if k == "rpar":
                    break
                if k != "comma":
                    raise ParseError("expected ',' or ')' in argument list")
        else:
            self.ts.expect("rpar")
        return Atom(pred, tuple(args))

    def _term(self, scope) -> Term:
        kind, value = self.ts.next()
        if kind == "int":
            return Pos(int(value))
        if kind == "ident":
            if value in scope:
                return Var(scope[value])
            return Const(value)
        raise ParseError(f"expected a term, got {value!r}")


def parse_formula(text: str) -> Formula:
    ts = _Tokens(tokenize(text))
    parser = _MillParser(ts)
    f = parser.parse_formula()
    if not ts.at_end():
        raise ParseError(f"trailing input after formula: {ts.peek()[1]!r}")
    return f


def parse_sequent(text: str) -> Sequent:
    ts = _Tokens(tokenize(text))
    parser = _MillParser(ts)
    antecedent: list[Formula] = []
    nxt = ts.peek()
    if nxt and nxt[0] == "turnstile":
        ts.next()
    else:
        while True:
            antecedent.append(parser._expr({}))
            k, v = ts.next()
            if k == "turnstile":
                break
            if k != "comma":
                raise ParseError(f"expected ',' or '|-', got {v!r}")
    succedent = parser._expr({})
    if not ts.at_end():
        raise ParseError(f"trailing input after sequent: {ts.peek()[1]!r}")
    return Sequent(tuple(antecedent), succedent)


# ---------------------------------------------------------------------------
# Categorial formulas


class _CatParser:
    def __init__(self, tokens: _Tokens):
        self.ts = tokens

    def parse(self) -> CatFormula:
        return self._expr()

    def _expr(self) -> CatFormula:
        left = self._unit()
        nxt = self.ts.peek()
        if nxt and nxt[0] in ("tensor", "under", "over", "gap", "gapnaive"):
            op = self.ts.next()[0]
            pattern = self._pattern_index() if op in ("tensor", "under", "over") else None
            right = self._unit()
            after = self.ts.peek()
            if after and after[0] in ("tensor", "under", "over", "gap", "gapnaive"):
                raise ParseError("chained binary operators need parentheses")
            if op == "tensor":
                return Prod(pattern, left, right)
            if op == "under":
                return Under(pattern, left, right)
            if op == "over":
                return Over(pattern, left, right)
            return Gap(left, right, scoped=(op == "gap"))
        return left

    def _pattern_index(self) -> Pattern:
        nxt = self.ts.peek()
        if nxt and nxt[0] == "lbrack":
            self.ts.next()
            name = self.ts.expect("ident")
            self.ts.expect("rbrack")
            try:
                return Pattern.parse(name)
            except PatternError as exc:
                raise ParseError(str(exc)) from None
        return LAMBEK

    def _unit(self) -> CatFormula:
        kind, value = self.ts.next()
        if kind == "lpar":
            f = self._expr()
            self.ts.expect("rpar")
            return f
        if kind == "ident":
            return CatAtom(value)
        raise ParseError(f"unexpected token {value!r} in categorial formula")


def parse_cat_formula(text: str) -> CatFormula:
    ts = _Tokens(tokenize(text))
    f = _CatParser(ts).parse()
    if not ts.at_end():
        raise ParseError(f"trailing input after formula: {ts.peek()[1]!r}")
    return f


# ---------------------------------------------------------------------------
# Order facts and lexicons


def _fact_term(kind: str, value: str) -> Term:
    if kind == "int":
        return Pos(int(value))
    if kind == "ident":
        return Const(value)
    raise ParseError(f"expected a term in order fact, got {value!r}")


def parse_order_facts(text: str) -> list[OrderFact]:
    """Comma-separated facts like ``0<1,1<2,X<=1``."""
    facts: list[OrderFact] = []
    if not text.strip():
        return facts
    for chunk in text.split(","):
        ts = _Tokens(tokenize(chunk))
        left = _fact_term(*ts.next())
        op, _ = ts.next()
        if op not in ("leq", "lt"):
            raise ParseError(f"expected <= or < in order fact {chunk!r}")
        right = _fact_term(*ts.next())
        if not ts.at_end():
            raise ParseError(f"trailing input in order fact {chunk!r}")
        facts.append(OrderFact(left, right, strict=(op == "lt")))
    return facts


def parse_lexicon(text: str) -> list[tuple[str, CatFormula]]:
    """Lexicon entries, one ``word := formula`` per line.  Duplicate words
    are allowed and mean lexical ambiguity."""
    entries: list[tuple[str, CatFormula]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":=" not in line:
            raise ParseError(f"line {lineno}: expected 'word := formula'")
        word, formula_text = line.split(":=", 1)
        word = word.strip()
        if not word:
            raise ParseError(f"line {lineno}: empty word")
        try:
            cat = parse_cat_formula(formula_text)
        except ParseError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
        entries.append((word, cat))
    return entries
