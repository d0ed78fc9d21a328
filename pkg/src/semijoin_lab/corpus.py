"""Built-in database pairs, semantic query oracles and witness search.

The named instances reproduce the classic inexpressibility witnesses at desk
scale: a transitive/non-transitive pair the duplicator defends forever, and an
ordered family where the duplicator survives a bounded number of rounds.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from . import game, sa
from .core import (
    CAnd,
    CAtom,
    Condition,
    Database,
    Omega,
    OMEGA_EQ,
    Schema,
    SemijoinError,
    make_db,
)

__all__ = [
    "fig1_databases",
    "fig1_strategy_maps",
    "ordered_transitivity",
    "at_least",
    "distinct_pair_expr",
    "functional_violation_expr",
    "is_transitive",
    "is_cartesian_closed",
    "random_database",
    "find_witness_pair",
    "NamedInstance",
    "named_instances",
]


_FIG1_A = [("a", "b"), ("b", "c"), ("a", "c"), ("d", "e"), ("e", "f"), ("d", "f")]
_FIG1_B = [("g", "h"), ("h", "i"), ("j", "k"), ("k", "l"), ("g", "l"), ("j", "i")]


def fig1_databases() -> tuple[Database, Database]:
    """Two six-element binary databases: R is transitive in the first and not
    in the second, yet no semijoin expression separates them."""
    return make_db({"R": _FIG1_A}), make_db({"R": _FIG1_B})


def fig1_strategy_maps() -> tuple[dict, dict]:
    """The two tuple-space bijections underlying the duplicator's strategy on
    the fig1 pair.  Keys and values are tuples from the respective spaces."""
    f_unary = dict(zip("abcdef", "ghijkl"))
    g_unary = dict(zip("abcdef", "jklghi"))
    f_binary = {
        ("a", "b"): ("g", "h"),
        ("b", "c"): ("h", "i"),
        ("d", "e"): ("j", "k"),
        ("e", "f"): ("k", "l"),
        ("a", "c"): ("g", "l"),
        ("d", "f"): ("j", "i"),
    }
    g_binary = {
        ("a", "b"): ("j", "k"),
        ("b", "c"): ("k", "l"),
        ("d", "e"): ("g", "h"),
        ("e", "f"): ("h", "i"),
        ("a", "c"): ("j", "i"),
        ("d", "f"): ("g", "l"),
    }
    f = {(u,): (v,) for u, v in f_unary.items()}
    f.update(f_binary)
    g = {(u,): (v,) for u, v in g_unary.items()}
    g.update(g_binary)
    return f, g


def ordered_transitivity(m: int) -> tuple[Database, Database]:
    """The ordered pair over values 1..2m+1 (zero-padded decimal strings):
    three blocks make the first database transitive, removing the middle
    block's central tuple breaks transitivity in the second."""
    if m < 3 or m % 2 == 0:
        raise SemijoinError(f"m must be an odd integer >= 3, got {m}")
    width = len(str(2 * m + 1))

    def v(i: int) -> str:
        return str(i).zfill(width)

    x_block = [(v(i), v(2 * m + 1)) for i in range(1, m + 1)]
    y_block = [(v(2 * m + 1), v(j)) for j in range(m + 1, 2 * m + 1)]
    z_block = [(v(i), v(j)) for i in range(1, m + 1) for j in range(m + 1, 2 * m + 1)]
    tuples_a = x_block + y_block + z_block
    removed = (v((m + 1) // 2), v(m + (m + 1) // 2))
    tuples_b = [t for t in tuples_a if t != removed]
    order = [v(i) for i in range(1, 2 * m + 2)]
    return (
        make_db({"R": tuples_a}, order=order),
        make_db({"R": tuples_b}, order=order),
    )


def at_least(k: int, relation: str = "S") -> sa.SAExpr:
    """Nonempty exactly when the unary relation holds at least k elements;
    needs an order but is invariant under the particular one."""
    if k < 1:
        raise SemijoinError(f"k must be positive, got {k}")
    expr: sa.SAExpr = sa.Relation(relation)
    cond = Condition(CAtom("x", 1, "<", "y", 1), 1, 1)
    for _ in range(k - 1):
        expr = sa.Semijoin(cond, sa.Relation(relation), expr)
    return expr


def distinct_pair_expr(relation: str = "S") -> sa.SAExpr:
    """Nonempty exactly when the unary relation holds at least two elements."""
    cond = Condition(CAtom("x", 1, "!=", "y", 1), 1, 1)
    return sa.Semijoin(cond, sa.Relation(relation), sa.Relation(relation))


def functional_violation_expr(relation: str = "D") -> sa.SAExpr:
    """Empty exactly when the binary relation is the graph of a partial function."""
    cond = Condition(
        CAnd(CAtom("x", 1, "=", "y", 1), CAtom("x", 2, "!=", "y", 2)), 2, 2
    )
    return sa.Semijoin(cond, sa.Relation(relation), sa.Relation(relation))


def _binary_rows(db: Database, relation: str) -> frozenset:
    if db.schema.arity(relation) != 2:
        raise SemijoinError(f"relation {relation!r} is not binary")
    return db.relation(relation)


def is_transitive(db: Database, relation: str = "R") -> bool:
    """Brute-force transitivity oracle for a binary relation."""
    rows = _binary_rows(db, relation)
    return all(
        (x, w) in rows for (x, y) in rows for (z, w) in rows if y == z
    )


def is_cartesian_closed(db: Database, relation: str = "R") -> bool:
    """Whether the binary relation equals the product of its two projections."""
    rows = _binary_rows(db, relation)
    left = {x for x, _ in rows}
    right = {y for _, y in rows}
    return rows == {(x, y) for x in left for y in right}


# --- random databases --------------------------------------------------------------


def random_database(
    schema: Schema,
    values: Sequence[str],
    rng: random.Random,
    *,
    density: float = 0.4,
) -> Database:
    """Independent coin flips over all possible tuples of each relation."""
    contents = {}
    for name in schema.names():
        arity = schema.arity(name)
        rows = [
            t
            for t in itertools.product(values, repeat=arity)
            if rng.random() < density
        ]
        contents[name] = rows
    return Database(schema, {n: frozenset(r) for n, r in contents.items()})


# --- certified witness search --------------------------------------------------------


def _product_minus_middle(rows: int, cols: int) -> tuple[Database, Database]:
    left = [str(i) for i in range(1, rows + 1)]
    right = [str(i) for i in range(rows + 1, rows + cols + 1)]
    full = [(x, y) for x in left for y in right]
    removed = (left[rows // 2], right[cols // 2])
    return make_db({"R": full}), make_db({"R": [t for t in full if t != removed]})


def _structured_candidates(relation: str):
    a, b = fig1_databases()
    yield a, b
    for size in (3, 4):
        yield _product_minus_middle(size, size)
    m3 = ordered_transitivity(3)
    yield make_db({"R": list(m3[0].relation("R"))}), make_db(
        {"R": list(m3[1].relation("R"))}
    )


def find_witness_pair(
    oracle_a: Callable[[Database], bool],
    oracle_b: Callable[[Database], bool],
    *,
    relation: str = "R",
    max_values: int = 8,
    seed: int = 0,
    max_candidates: int = 400,
    omega: Omega = OMEGA_EQ,
) -> Optional[tuple[Database, Database]]:
    """Search for a certified inexpressibility witness: a database pair split
    by the two oracles on which the duplicator wins the infinite game from the
    empty configuration.  Candidates are checked in a deterministic order and
    every returned pair is re-verified before being handed out."""

    def certify(A: Database, B: Database) -> bool:
        if len(A.active_domain) > max_values or len(B.active_domain) > max_values:
            return False
        if not A.relation(relation) or not B.relation(relation):
            return False
        if not oracle_a(A) or oracle_b(B):
            return False
        pair = game.GamePair(A, B, omega)
        region = pair.refine()
        return game.Config((), ()) in region.fixpoint

    rng = random.Random(seed)
    candidates = itertools.chain(
        _structured_candidates(relation), _random_candidates(relation, max_values, rng)
    )
    for A, B in itertools.islice(candidates, max_candidates):
        if certify(A, B):
            return A, B
    return None


def _random_candidates(relation: str, max_values: int, rng: random.Random):
    values = [str(i) for i in range(1, max_values + 1)]
    schema = Schema({relation: 2})
    while True:
        size = rng.randint(2, max_values)
        A = random_database(schema, values[:size], rng, density=rng.uniform(0.3, 0.8))
        rows = list(A.relation(relation))
        if not rows:
            continue
        mutated = list(rows)
        mutated.remove(rng.choice(rows))
        B = Database(schema, {relation: frozenset(mutated)})
        yield A, B


# --- named instances ------------------------------------------------------------------


@dataclass(frozen=True)
class NamedInstance:
    """A corpus entry: its databases plus oracle-checked metadata."""

    name: str
    description: str
    build: Callable[..., tuple[Database, Database]]


def _fig1_checked() -> tuple[Database, Database]:
    A, B = fig1_databases()
    if not is_transitive(A) or is_transitive(B):
        raise SemijoinError("fig1 construction failed its oracle check")
    return A, B


def _ordered_checked(m: int = 3) -> tuple[Database, Database]:
    A, B = ordered_transitivity(m)
    if not is_transitive(A) or is_transitive(B):
        raise SemijoinError("ordered-transitivity construction failed its oracle check")
    return A, B


def named_instances() -> list[NamedInstance]:
    return [
        NamedInstance(
            "fig1",
            "transitive vs non-transitive pair, duplicator wins forever",
            lambda **kw: _fig1_checked(),
        ),
        NamedInstance(
            "ordered-transitivity",
            "ordered pair over 2m+1 values; pass --m (odd, >= 3)",
            lambda m=3, **kw: _ordered_checked(m),
        ),
    ]
