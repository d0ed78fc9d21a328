"""Semijoin algebra, guarded formulas and the game that separates them."""

from .core import (
    AtomicType,
    Condition,
    Database,
    DialectError,
    Omega,
    OMEGA_EQ,
    OMEGA_ORDERED,
    ParseError,
    Schema,
    SchemaError,
    SemijoinError,
    atomic_type,
    dump_database,
    enumerate_atomic_types,
    eval_condition,
    load_database,
    make_db,
    projection_pattern,
    sorted_tuple_space,
    tuple_space,
)
from .sa import (
    Dialect,
    Difference,
    Projection,
    Relation,
    Selection,
    Semijoin,
    Union,
    check_sa,
    eval_sa,
    format_sa,
    lemma1_check,
    nesting_depth,
    parse_sa,
    random_expr,
)
from .gf import (
    And,
    EqAtom,
    GuardedExists,
    Iff,
    Implies,
    Not,
    Or,
    RelAtom,
    check_guarded,
    eval_gf,
    format_gf,
    gf_result_set,
    parse_gf,
    random_formula,
)
from .translate import InjectionSpec, gf_sentence_to_sa0, gf_to_sa, sa_to_gf
from .game import (
    Config,
    GamePair,
    Strategy,
    Synthesizer,
    WinningRegion,
    distinguish,
    duplicator_strategy,
    legal_answers,
    synth_E0,
    synth_Er,
    winning_region_infinite,
    wins_m,
    wins_round0,
)
from .corpus import (
    at_least,
    distinct_pair_expr,
    fig1_databases,
    fig1_strategy_maps,
    find_witness_pair,
    functional_violation_expr,
    is_cartesian_closed,
    is_transitive,
    ordered_transitivity,
    random_database,
)

__version__ = "0.1.0"
