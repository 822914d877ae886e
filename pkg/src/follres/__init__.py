"""Residuated connective families over first-order multiplicative
intuitionistic linear logic: pattern catalogs, a categorial-to-logical
translation with partial-order constraints, a sequent prover, and a
proof-net engine with contraction-based correctness."""

from .order import Inconsistent, OrderFact, OrderStore, merge_bindings, store_from_facts
from .patterns import (
    ConnectiveSchema,
    Pattern,
    PatternError,
    count_patterns,
    count_wellnested,
    enumerate_patterns,
    is_well_nested,
    mirror,
    pattern_label,
    required_facts,
    schema,
    validate_pattern,
)
from .prover import (
    Derivation,
    SuiteEntry,
    derivation_substitution,
    prove,
    prove_all,
    residuation_suite,
    validate_derivation,
)
from .proofnet import (
    AbstractProofStructure,
    Component,
    Link,
    Matching,
    NetResult,
    Occurrence,
    ProofStructure,
    SearchStats,
    abstract,
    abstract_dot,
    candidate_table,
    components,
    contract,
    enumerate_matchings,
    existential_frontier,
    matching_space,
    net_search,
    prove_net,
    structure_dot,
    unfold,
)
from .syntax import (
    ParseError,
    parse_cat_formula,
    parse_formula,
    parse_lexicon,
    parse_order_facts,
    parse_sequent,
)
from .terms import (
    Atom,
    CatAtom,
    Const,
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
    Under,
    Var,
    alpha_equal,
    cat_str,
    formula_str,
    free_eigenvariables,
    instantiate,
    sequent_str,
    substitute,
    unify,
    unify_atoms,
)
from .translate import (
    DecoratedFormula,
    LexEntry,
    SentenceInstantiation,
    TranslationError,
    UnknownWordError,
    instantiate_sentence,
    sentence_readings,
    translate,
    translate_gap,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
