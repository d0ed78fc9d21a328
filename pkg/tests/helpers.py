"""Shared test oracles: independent implementations used to cross-check the
library, plus small enumeration utilities."""

from __future__ import annotations

import itertools
import random

from semijoin_lab import gf
from semijoin_lab.core import Database, Schema


def eval_gf_naive(phi, db: Database, env: dict) -> bool:
    """Unguarded reference semantics: quantifiers range over the full active
    domain, the guard is just another conjunct."""
    if isinstance(phi, gf.RelAtom):
        return tuple(env[a] for a in phi.args) in db.relation(phi.name)
    if isinstance(phi, gf.EqAtom):
        return env[phi.left] == env[phi.right]
    if isinstance(phi, gf.Not):
        return not eval_gf_naive(phi.inner, db, env)
    if isinstance(phi, gf.And):
        return eval_gf_naive(phi.left, db, env) and eval_gf_naive(phi.right, db, env)
    if isinstance(phi, gf.Or):
        return eval_gf_naive(phi.left, db, env) or eval_gf_naive(phi.right, db, env)
    if isinstance(phi, gf.Implies):
        return not eval_gf_naive(phi.left, db, env) or eval_gf_naive(phi.right, db, env)
    if isinstance(phi, gf.Iff):
        return eval_gf_naive(phi.left, db, env) == eval_gf_naive(phi.right, db, env)
    if isinstance(phi, gf.GuardedExists):
        adom = sorted(db.active_domain)
        for combo in itertools.product(adom, repeat=len(phi.bound)):
            env2 = dict(env)
            env2.update(zip(phi.bound, combo))
            if eval_gf_naive(phi.guard, db, env2) and eval_gf_naive(phi.body, db, env2):
                return True
        return False
    raise AssertionError(f"unknown node {phi!r}")


def gf_result_naive(phi, db: Database, variables: list[str]) -> frozenset:
    adom = sorted(db.active_domain)
    out = set()
    for combo in itertools.product(adom, repeat=len(variables)):
        if eval_gf_naive(phi, db, dict(zip(variables, combo))):
            out.add(combo)
    return frozenset(out)


def anchored_query_naive(
    phi, db: Database, k: int, relation: str, mapping: tuple[int, ...]
) -> frozenset:
    """The semantic query a logic-to-algebra translation must compute: formula
    result restricted to tuples embedded in the anchor relation."""
    xs = [f"x{i}" for i in range(1, k + 1)]
    rows = db.relation(relation)
    out = set()
    adom = sorted(db.active_domain)
    for combo in itertools.product(adom, repeat=k):
        if not eval_gf_naive(phi, db, dict(zip(xs, combo))):
            continue
        if any(all(combo[i] == t[mapping[i] - 1] for i in range(k)) for t in rows):
            out.add(combo)
    return frozenset(out)


def bell_number(n: int) -> int:
    """Bell triangle recurrence."""
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for value in row:
            nxt.append(nxt[-1] + value)
        row = nxt
    return row[0]


def ordered_bell_number(n: int) -> int:
    """Counts weak orders: a(n) = sum_k C(n,k) a(n-k)."""
    memo = {0: 1}

    def rec(m: int) -> int:
        if m in memo:
            return memo[m]
        total = 0
        for k in range(1, m + 1):
            total += _binom(m, k) * rec(m - k)
        memo[m] = total
        return total

    return rec(n)


def _binom(n: int, k: int) -> int:
    out = 1
    for i in range(k):
        out = out * (n - i) // (i + 1)
    return out


def binary_dbs_up_to_iso(values: tuple[str, ...] = ("u", "v", "w"), relation: str = "R"):
    """All databases over one binary relation using at most ``len(values)``
    values, deduplicated up to bijective renaming of values.  Every game and
    synthesis notion here is invariant under renaming, so one representative
    per class suffices for exhaustive checks."""
    cells = list(itertools.product(values, repeat=2))
    seen = set()
    out = []
    schema = Schema({relation: 2})
    for mask in range(1 << len(cells)):
        rows = frozenset(cells[i] for i in range(len(cells)) if mask >> i & 1)
        used = sorted({v for t in rows for v in t})
        canonical = None
        for perm in itertools.permutations(used):
            renaming = dict(zip(used, perm))
            key = tuple(sorted((renaming[x], renaming[y]) for x, y in rows))
            if canonical is None or key < canonical:
                canonical = key
        if canonical in seen:
            continue
        seen.add(canonical)
        out.append(Database(schema, {relation: rows}))
    return out


def random_game_schema(rng: random.Random) -> Schema:
    """One or two relations of arity 1..2, suitable for game-solver tests."""
    relations = {"R": 2}
    if rng.random() < 0.7:
        relations["S"] = rng.choice((1, 2))
    return Schema(relations)
