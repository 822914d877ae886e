"""Terms, formulas and unification for first-order multiplicative
intuitionistic linear logic, plus the categorial formula language that
translates into it.

Terms are flat (no function symbols): string positions are integer
constants, rigid symbols, or variables.  Metavariables stand for terms
still to be determined by unification; eigenvariables are the fresh rigid
variables of quantifier rules.  Both carry a creation level (monotone per
proof attempt) which the prover uses for its quantifier scope check; the
level is deliberately excluded from equality so that a variable keeps its
identity across the places that mention it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union

from .patterns import LAMBEK, Pattern


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Meta:
    """A unification placeholder, introduced for an instantiable quantifier."""

    name: str
    level: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Eigen:
    """A rigid fresh variable, introduced for a quantifier with the
    no-free-occurrence side condition."""

    name: str
    level: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Pos:
    """A concrete string position (integer boundary between words)."""

    value: int


@dataclass(frozen=True)
class Const:
    """A rigid constant, e.g. the c_x standing in for a detached eigenvariable."""

    name: str


@dataclass(frozen=True)
class Var:
    """A bound-variable occurrence inside a formula body."""

    name: str


Term = Union[Meta, Eigen, Pos, Const, Var]


def term_str(t: Term) -> str:
    if isinstance(t, Pos):
        return str(t.value)
    return t.name


# ---------------------------------------------------------------------------
# MILL formulas


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True)
class Tensor:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Limp:
    """Linear implication: left -o right."""

    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


Formula = Union[Atom, Tensor, Limp, Forall, Exists]


@dataclass(frozen=True)
class Sequent:
    """Antecedent formulas (resources, order immaterial) and one succedent."""

    antecedent: tuple[Formula, ...]
    succedent: Formula


def formula_str(f: Formula) -> str:
    if isinstance(f, Atom):
        if not f.args:
            return f.pred
        return f"{f.pred}({','.join(term_str(a) for a in f.args)})"
    if isinstance(f, Tensor):
        return f"({formula_str(f.left)} * {formula_str(f.right)})"
    if isinstance(f, Limp):
        return f"({formula_str(f.left)} -o {formula_str(f.right)})"
    if isinstance(f, Forall):
        return f"forall {f.var}.{formula_str(f.body)}"
    if isinstance(f, Exists):
        return f"exists {f.var}.{formula_str(f.body)}"
    raise TypeError(f"not a formula: {f!r}")


def sequent_str(seq: Sequent) -> str:
    left = ", ".join(formula_str(f) for f in seq.antecedent)
    return f"{left} |- {formula_str(seq.succedent)}" if left else f"|- {formula_str(seq.succedent)}"


# ---------------------------------------------------------------------------
# Categorial formulas


@dataclass(frozen=True)
class CatAtom:
    name: str


@dataclass(frozen=True)
class Prod:
    """Product: left and right operand segments interleaved per pattern."""

    pattern: Pattern
    left: "CatFormula"
    right: "CatFormula"


@dataclass(frozen=True)
class Under:
    """Left division left\\right: the operand missing on the left."""

    pattern: Pattern
    left: "CatFormula"
    right: "CatFormula"


@dataclass(frozen=True)
class Over:
    """Right division left/right: the operand missing on the right."""

    pattern: Pattern
    left: "CatFormula"
    right: "CatFormula"


@dataclass(frozen=True)
class Gap:
    """An argument consumed as an empty string.  The scoped variant keeps an
    existential around the whole implication; the naive variant quantifies
    the gap formula alone."""

    gap: "CatFormula"
    result: "CatFormula"
    scoped: bool = True


CatFormula = Union[CatAtom, Prod, Under, Over, Gap]


def cat_str(c: CatFormula) -> str:
    def pat(p: Pattern) -> str:
        return "" if p == LAMBEK else f"[{p}]"

    if isinstance(c, CatAtom):
        return c.name
    if isinstance(c, Prod):
        return f"({cat_str(c.left)} *{pat(c.pattern)} {cat_str(c.right)})"
    if isinstance(c, Under):
        return f"({cat_str(c.left)} \\{pat(c.pattern)} {cat_str(c.right)})"
    if isinstance(c, Over):
        return f"({cat_str(c.left)} /{pat(c.pattern)} {cat_str(c.right)})"
    if isinstance(c, Gap):
        op = "|>" if c.scoped else "|>!"
        return f"({cat_str(c.gap)} {op} {cat_str(c.result)})"
    raise TypeError(f"not a categorial formula: {c!r}")


# ---------------------------------------------------------------------------
# Substitutions

Substitution = dict[str, Term]


def walk(t: Term, s: Substitution) -> Term:
    """Resolve a term through the substitution until it is no bound meta."""
    while isinstance(t, Meta) and t.name in s:
        t = s[t.name]
    return t


def substitute_term(t: Term, s: Substitution) -> Term:
    return walk(t, s)


def substitute(f: Formula, s: Substitution) -> Formula:
    """Replace every free metavariable occurrence; bound variables are
    untouched (binders never capture: all names are globally fresh)."""
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(walk(a, s) for a in f.args))
    if isinstance(f, Tensor):
        return Tensor(substitute(f.left, s), substitute(f.right, s))
    if isinstance(f, Limp):
        return Limp(substitute(f.left, s), substitute(f.right, s))
    if isinstance(f, Forall):
        return Forall(f.var, substitute(f.body, s))
    if isinstance(f, Exists):
        return Exists(f.var, substitute(f.body, s))
    raise TypeError(f"not a formula: {f!r}")


def instantiate(body: Formula, var: str, t: Term) -> Formula:
    """Replace the bound occurrences Var(var) by t (quantifier elimination)."""
    if isinstance(body, Atom):
        return Atom(body.pred, tuple(t if a == Var(var) else a for a in body.args))
    if isinstance(body, Tensor):
        return Tensor(instantiate(body.left, var, t), instantiate(body.right, var, t))
    if isinstance(body, Limp):
        return Limp(instantiate(body.left, var, t), instantiate(body.right, var, t))
    if isinstance(body, (Forall, Exists)):
        if body.var == var:  # shadowing cannot occur after renaming, but be safe
            return body
        kind = type(body)
        return kind(body.var, instantiate(body.body, var, t))
    raise TypeError(f"not a formula: {body!r}")


def unify(t1: Term, t2: Term, s: Substitution) -> Substitution | None:
    """Most general extension of s making t1 and t2 equal, or None.

    Eigen, Pos, Const and Var are rigid; a Meta binds to anything.  Terms
    are flat, so the occurs check is trivial.
    """
    a, b = walk(t1, s), walk(t2, s)
    if a == b:
        return s
    if isinstance(a, Meta):
        s2 = dict(s)
        s2[a.name] = b
        return s2
    if isinstance(b, Meta):
        s2 = dict(s)
        s2[b.name] = a
        return s2
    return None


def unify_atoms(a1: Atom, a2: Atom, s: Substitution) -> Substitution | None:
    """Unify predicate, arity and arguments left to right, or None."""
    if a1.pred != a2.pred or len(a1.args) != len(a2.args):
        return None
    for x, y in zip(a1.args, a2.args):
        s = unify(x, y, s)
        if s is None:
            return None
    return s


def new_bindings(old: Substitution, new: Substitution) -> Iterator[tuple[str, Term]]:
    for name, t in new.items():
        if name not in old:
            yield name, t


# ---------------------------------------------------------------------------
# Free variables and alpha equivalence


def free_eigenvariables(f: Formula) -> set[str]:
    """Names of the eigenvariables with a free occurrence in f."""
    if isinstance(f, Atom):
        return {a.name for a in f.args if isinstance(a, Eigen)}
    if isinstance(f, (Tensor, Limp)):
        return free_eigenvariables(f.left) | free_eigenvariables(f.right)
    if isinstance(f, (Forall, Exists)):
        return free_eigenvariables(f.body)
    raise TypeError(f"not a formula: {f!r}")


def free_names(f: Formula) -> set[str]:
    """Names of all free Var/Meta/Eigen/Const occurrences."""
    if isinstance(f, Atom):
        return {a.name for a in f.args if not isinstance(a, Pos)}
    if isinstance(f, (Tensor, Limp)):
        return free_names(f.left) | free_names(f.right)
    if isinstance(f, (Forall, Exists)):
        return free_names(f.body) - {f.var}
    raise TypeError(f"not a formula: {f!r}")


def _quantifier_block(f: Formula) -> tuple[type, list[str], Formula]:
    kind = type(f)
    names: list[str] = []
    while isinstance(f, kind):
        names.append(f.var)
        f = f.body
    return kind, names, f


def alpha_equal(f1: Formula, f2: Formula) -> bool:
    """Equality up to renaming of bound variables.

    Consecutive quantifiers of the same kind commute, so a block like
    forall x1 forall x0 is compared against all orderings of the matching
    block; this makes the two spellings of a two-sided gap formula equal.
    """
    import itertools

    def go(a: Formula, b: Formula, env: dict[str, str]) -> bool:
        if isinstance(a, (Forall, Exists)) or isinstance(b, (Forall, Exists)):
            if type(a) is not type(b):
                return False
            _, vs1, body1 = _quantifier_block(a)
            kind, vs2, body2 = _quantifier_block(b)
            if len(vs1) != len(vs2):
                return False
            for perm in itertools.permutations(vs2):
                env2 = dict(env)
                env2.update(zip(vs1, perm))
                if go(body1, body2, env2):
                    return True
            return False
        if isinstance(a, Atom) and isinstance(b, Atom):
            if a.pred != b.pred or len(a.args) != len(b.args):
                return False
            for x, y in zip(a.args, b.args):
                if isinstance(x, Var):
                    if not (isinstance(y, Var) and env.get(x.name, x.name) == y.name):
                        return False
                elif x != y:
                    return False
            return True
        if type(a) is not type(b):
            return False
        if isinstance(a, (Tensor, Limp)):
            return go(a.left, b.left, env) and go(a.right, b.right, env)
        return False

    return go(f1, f2, {})


# ---------------------------------------------------------------------------
# Fresh names and creation levels


class NameSupply:
    """Fresh-name source for one sentence instantiation or proof attempt.

    Metavariable-destined binders get capital letters, eigenvariable-destined
    binders get x0, x1, ...; arbitrary names are made fresh by priming.
    """

    _CAPS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"

    def __init__(self, reserved: set[str] | None = None):
        self._used: set[str] = set(reserved or ())
        self._caps = 0
        self._xs = 0

    def claim(self, name: str) -> str:
        while name in self._used:
            name += "'"
        self._used.add(name)
        return name

    def meta_style(self) -> str:
        while True:
            if self._caps < 26:
                cand = self._CAPS[self._caps]
            else:
                cand = f"M{self._caps - 26}"
            self._caps += 1
            if cand not in self._used:
                self._used.add(cand)
                return cand

    def eigen_style(self) -> str:
        while True:
            cand = f"x{self._xs}"
            self._xs += 1
            if cand not in self._used:
                self._used.add(cand)
                return cand


class LevelCounter:
    """Monotone creation-level source for one proof attempt.  Records the
    level of every variable it hands out, keyed by name."""

    def __init__(self):
        self._next = 0
        self._used_names: set[str] = set()
        self.levels: dict[str, int] = {}

    def fresh_name(self, name: str) -> str:
        while name in self._used_names:
            name += "'"
        self._used_names.add(name)
        return name

    def make_meta(self, name: str) -> Meta:
        m = Meta(self.fresh_name(name), self._next)
        self.levels[m.name] = self._next
        self._next += 1
        return m

    def make_eigen(self, name: str) -> Eigen:
        e = Eigen(self.fresh_name(name), self._next)
        self.levels[e.name] = self._next
        self._next += 1
        return e
