"""Concatenation-like connective patterns: strings over {a, b, 1}.

A pattern describes how the string segments of a product's two operands
interleave: ``a`` symbols are segments of the left operand, ``b`` symbols
segments of the right operand, and ``1`` marks a hole between segments.
Each valid pattern induces a residuated triple (product, left division,
right division) over position tuples, plus the order facts that must be
stated explicitly for the triple to determine a unique linear order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

A, B, ONE = "a", "b", "1"
ALPHABET = (A, B, ONE)

ROLE_PRODUCT = "product"
ROLE_UNDER = "under"
ROLE_OVER = "over"
ROLES = (ROLE_PRODUCT, ROLE_UNDER, ROLE_OVER)


class PatternError(ValueError):
    pass


@dataclass(frozen=True)
class Pattern:
    """A non-empty symbol sequence over {a, b, 1}."""

    symbols: tuple[str, ...]

    def __post_init__(self):
        if not validate_pattern(self.symbols):
            raise PatternError(f"invalid pattern {''.join(self.symbols)!r}")

    @classmethod
    def parse(cls, text: str) -> "Pattern":
        return cls(tuple(text))

    def __str__(self) -> str:
        return "".join(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)


LAMBEK = None  # initialised below, after Pattern is defined


def validate_pattern(symbols) -> bool:
    """True iff the symbol sequence is a valid concatenation pattern.

    Conditions: starts with a; no two equal adjacent symbols (aa, bb and 11
    lose segment structure); contains at least one b; does not end in 1.
    """
    syms = tuple(symbols)
    if not syms or any(s not in ALPHABET for s in syms):
        return False
    if syms[0] != A:
        return False
    if any(x == y for x, y in zip(syms, syms[1:])):
        return False
    if B not in syms:
        return False
    if syms[-1] == ONE:
        return False
    return True


# Transition tables of the two pattern automata.  States q3/q4 accept; the
# well-nested variant drops the b-transition out of q4 (once an `a` follows
# a `b`, no further `b` may appear) and tracks the 1/a alternation in q6.
_FSA_FULL = {
    "q0": ((A, "q1"),),
    "q1": ((B, "q3"), (ONE, "q2")),
    "q2": ((A, "q1"), (B, "q3")),
    "q3": ((A, "q4"), (ONE, "q5")),
    "q4": ((B, "q3"), (ONE, "q5")),
    "q5": ((A, "q4"), (B, "q3")),
}
_FSA_WN = {
    "q0": ((A, "q1"),),
    "q1": ((B, "q3"), (ONE, "q2")),
    "q2": ((A, "q1"), (B, "q3")),
    "q3": ((A, "q4"), (ONE, "q5")),
    "q4": ((ONE, "q6"),),
    "q5": ((A, "q4"), (B, "q3")),
    "q6": ((A, "q4"),),
}
_ACCEPTING = frozenset(("q3", "q4"))

# Lexicographic symbol order used for enumeration and naming: a < b < 1.
_SYMBOL_RANK = {A: 0, B: 1, ONE: 2}


def enumerate_patterns(k: int, well_nested_only: bool = False) -> list[Pattern]:
    """All valid patterns with k segments, lexicographically (a < b < 1)."""
    if k < 1:
        raise PatternError("segment count must be >= 1")
    fsa = _FSA_WN if well_nested_only else _FSA_FULL
    out: list[Pattern] = []

    def walk(state: str, prefix: list[str]):
        if len(prefix) == k:
            if state in _ACCEPTING:
                out.append(Pattern(tuple(prefix)))
            return
        for sym, nxt in sorted(fsa[state], key=lambda t: _SYMBOL_RANK[t[0]]):
            prefix.append(sym)
            walk(nxt, prefix)
            prefix.pop()

    walk("q0", [])
    return out


_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def pattern_label(k: int, index: int) -> str:
    """Catalog name for the index-th pattern of size k: 4a, 4b, ... (then 4aa...)."""
    if index < 26:
        return f"{k}{_LETTERS[index]}"
    hi, lo = divmod(index - 26, 26)
    return f"{k}{_LETTERS[hi]}{_LETTERS[lo]}"


def _count_fsa(k: int, fsa) -> int:
    counts = {state: 0 for state in fsa}
    counts["q0"] = 1
    for _ in range(k):
        nxt = {state: 0 for state in fsa}
        for state, n in counts.items():
            for _sym, target in fsa[state]:
                nxt[target] += n
        counts = nxt
    return sum(counts[s] for s in _ACCEPTING)


def count_patterns(k: int, method: str = "fsa") -> int:
    """Number of valid patterns with k segments.

    Three independent methods must agree: a path count over the automaton,
    the doubling recurrence p(k) = 2*p(k-1) + [k even], and the closed form
    ceil(2*(2^(k-1) - 1)/3).
    """
    if k < 1:
        raise PatternError("segment count must be >= 1")
    if method == "fsa":
        return _count_fsa(k, _FSA_FULL)
    if method == "recurrence":
        p = 0
        for i in range(2, k + 1):
            p = 2 * p + (1 if i % 2 == 0 else 0)
        return p
    if method == "closed":
        return -(-(2 * (2 ** (k - 1) - 1)) // 3)
    raise ValueError(f"unknown method {method!r}")


def count_wellnested(k: int, method: str = "formula") -> int:
    """Number of well-nested patterns with k segments: floor(k/2)*ceil(k/2)."""
    if k < 1:
        raise PatternError("segment count must be >= 1")
    if method == "formula":
        return (k // 2) * ((k + 1) // 2)
    if method == "fsa":
        return _count_fsa(k, _FSA_WN)
    raise ValueError(f"unknown method {method!r}")


def is_well_nested(p: Pattern) -> bool:
    """True iff no b follows an a that itself follows a b (abab is the
    minimal violation)."""
    seen_b = False
    seen_a_after_b = False
    for s in p.symbols:
        if s == B:
            if seen_a_after_b:
                return False
            seen_b = True
        elif s == A and seen_b:
            seen_a_after_b = True
    return True


def mirror(p: Pattern) -> tuple[str, ...]:
    """Left-right mirror image of a pattern (a b-first string; these are not
    themselves valid patterns but name the symmetric connective family)."""
    return tuple(reversed(p.symbols))


@dataclass(frozen=True)
class ConnectiveSchema:
    """Position bookkeeping for one pattern's residuated triple.

    ``tuple_a``/``tuple_b`` list the segment endpoints of the two operands,
    ``tuple_c`` those of the result (maximal non-hole stretches).  Every
    position index lands in exactly two of the three tuples; the one tuple
    it misses determines where it is quantified: shared a/b indices are
    existential in the product, shared a/c indices universal in the left
    division, shared b/c indices universal in the right division.
    ``required_facts`` holds, per role, the adjacent-position order facts
    that must be stated explicitly to pin down a unique linear order.
    """

    pattern: Pattern
    n_positions: int
    tuple_a: tuple[int, ...]
    tuple_b: tuple[int, ...]
    tuple_c: tuple[int, ...]
    exist_vars: frozenset[int]
    under_vars: frozenset[int]
    over_vars: frozenset[int]
    required_facts: dict[str, tuple[tuple[int, int], ...]]


def _operand_tuples(p: Pattern) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
    syms = p.symbols
    tup_a: list[int] = []
    tup_b: list[int] = []
    for i, s in enumerate(syms):
        if s == A:
            tup_a += [i, i + 1]
        elif s == B:
            tup_b += [i, i + 1]
    tup_c: list[int] = []
    i = 0
    while i < len(syms):
        if syms[i] == ONE:
            i += 1
            continue
        j = i
        while j < len(syms) and syms[j] != ONE:
            j += 1
        tup_c += [i, j]
        i = j
    return tuple(tup_a), tuple(tup_b), tuple(tup_c)


def _segments(tup: tuple[int, ...]) -> list[tuple[int, int]]:
    return [(tup[i], tup[i + 1]) for i in range(0, len(tup), 2)]


def _chain_pairs(tup: tuple[int, ...]) -> set[tuple[int, int]]:
    return {(tup[i], tup[i + 1]) for i in range(len(tup) - 1)}


def _linear_extensions(n: int, pairs: set[tuple[int, int]]):
    """All orderings of 0..n-1 respecting the given precedence pairs."""
    succ = {i: set() for i in range(n)}
    preds = {i: 0 for i in range(n)}
    for x, y in pairs:
        if y not in succ[x]:
            succ[x].add(y)
            preds[y] += 1

    order: list[int] = []

    def rec():
        if len(order) == n:
            yield tuple(order)
            return
        for v in range(n):
            if preds[v] == 0 and v not in order:
                order.append(v)
                for w in succ[v]:
                    preds[w] -= 1
                yield from rec()
                for w in succ[v]:
                    preds[w] += 1
                order.pop()

    yield from rec()


def _geometry_ok(order: tuple[int, ...], t1, t2, role: str) -> bool:
    """Check that a candidate linear order places the operand segments
    consistently: division operands sit inside the result's stretches, and
    the two product operands never overlap."""
    rank = {v: i for i, v in enumerate(order)}
    segs1 = [(rank[u], rank[v]) for u, v in _segments(t1)]
    segs2 = [(rank[u], rank[v]) for u, v in _segments(t2)]
    if role == ROLE_PRODUCT:
        for lo1, hi1 in segs1:
            for lo2, hi2 in segs2:
                if lo1 < hi2 and lo2 < hi1:
                    return False
        return True
    # under/over: t2 is the composite result; each operand segment must fit
    # inside a single result stretch.
    for lo1, hi1 in segs1:
        if not any(lo2 <= lo1 and hi1 <= hi2 for lo2, hi2 in segs2):
            return False
    return True


def _admissible_extensions(p: Pattern, role: str, facts: set[tuple[int, int]]):
    t1, t2 = _role_tuples(p, role)
    base = _chain_pairs(t1) | _chain_pairs(t2) | facts
    n = len(p) + 1
    return [
        order
        for order in _linear_extensions(n, base)
        if _geometry_ok(order, t1, t2, role)
    ]


def _role_tuples(p: Pattern, role: str):
    ta, tb, tc = _operand_tuples(p)
    if role == ROLE_PRODUCT:
        return ta, tb
    if role == ROLE_UNDER:
        return ta, tc
    if role == ROLE_OVER:
        return tb, tc
    raise ValueError(f"unknown role {role!r}")


def required_facts(p: Pattern, role: str) -> list[tuple[int, int]]:
    """Smallest set of adjacent-position facts (i <= i+1) that makes the
    operand chains admit exactly one admissible linear order (which is then
    necessarily 0 < 1 < ... < n)."""
    t1, t2 = _role_tuples(p, role)
    n = len(p) + 1
    chains = _chain_pairs(t1) | _chain_pairs(t2)
    candidates = [(i, i + 1) for i in range(n - 1) if (i, i + 1) not in chains]
    for size in range(len(candidates) + 1):
        for subset in itertools.combinations(candidates, size):
            exts = _admissible_extensions(p, role, set(subset))
            if len(exts) == 1:
                assert exts[0] == tuple(range(n))
                return list(subset)
    raise PatternError(f"no fact set pins down {p} for role {role}")


@lru_cache(maxsize=None)
def schema(p: Pattern) -> ConnectiveSchema:
    """Tuples, quantifier sets and required order facts for a pattern."""
    ta, tb, tc = _operand_tuples(p)
    in_a, in_b, in_c = set(ta), set(tb), set(tc)
    exist = in_a & in_b
    under = in_a & in_c
    over = in_b & in_c
    for i in range(len(p) + 1):
        sets = [i in in_a, i in in_b, i in in_c]
        assert sum(sets) == 2, f"position {i} of {p} not shared by exactly two tuples"
    facts = {role: tuple(required_facts(p, role)) for role in ROLES}
    return ConnectiveSchema(
        pattern=p,
        n_positions=len(p) + 1,
        tuple_a=ta,
        tuple_b=tb,
        tuple_c=tc,
        exist_vars=frozenset(exist),
        under_vars=frozenset(under),
        over_vars=frozenset(over),
        required_facts=facts,
    )


LAMBEK = Pattern.parse("ab")
