"""The two-player tuple game characterizing semijoin distinguishability.

Players pick tuples from the two databases' tuple spaces.  The duplicator
survives a round when her answer matches the spoiler's move in projection
membership and preserves the joint atomic type with the previous
configuration.  A configuration survives the infinite game exactly when no
expression of the algebra separates its two tuples; eliminated configurations
come with a synthesized separating expression whose nesting depth matches the
elimination round.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Optional, Sequence

from . import sa
from .core import (
    CBool,
    Condition,
    Database,
    Omega,
    OMEGA_EQ,
    SemijoinError,
    atomic_type,
    enumerate_atomic_types,
    projection_pattern,
    sorted_tuple_space,
)

__all__ = [
    "Config",
    "WinningRegion",
    "Strategy",
    "GamePair",
    "wins_round0",
    "legal_answers",
    "wins_m",
    "winning_region_infinite",
    "duplicator_strategy",
    "Synthesizer",
    "synth_E0",
    "synth_Er",
    "distinguish",
    "region_report",
]


class Config(NamedTuple):
    """A game position: one tuple per database."""

    a: tuple
    b: tuple


@dataclass(frozen=True)
class WinningRegion:
    """Round-synchronous refinement trace.

    ``rounds[i]`` is the set of configurations the duplicator can defend for
    i rounds; the last entry equals the greatest fixpoint.  Eliminated
    configurations map to their elimination round (their spoiler rank): 0 for
    configurations that already fail the zero-round conditions, r >= 1 for
    configurations removed in refinement round r.
    """

    rounds: tuple[frozenset, ...]
    fixpoint: frozenset
    elimination_round: Mapping[Config, int]

    def wins(self, a: Sequence[str], b: Sequence[str], m: int | None = None) -> bool:
        cfg = Config(tuple(a), tuple(b))
        if m is None:
            return cfg in self.fixpoint
        return cfg in self.rounds[min(m, len(self.rounds) - 1)]

    def spoiler_rank(self, a: Sequence[str], b: Sequence[str]) -> Optional[int]:
        return self.elimination_round.get(Config(tuple(a), tuple(b)))


class GamePair:
    """Precomputed move data for one ordered database pair.

    Building the joint-type tables is quadratic in the tuple-space sizes, so a
    pair object is built once and shared by the solver, the strategy extractor
    and the interactive front end.  It is immutable after construction.
    """

    def __init__(self, A: Database, B: Database, omega: Omega = OMEGA_EQ):
        if A.schema != B.schema:
            raise SemijoinError("the two databases must share a schema")
        self.A, self.B, self.omega = A, B, omega
        self.space_a = sorted_tuple_space(A)
        self.space_b = sorted_tuple_space(B)
        self.pattern_a = {t: projection_pattern(A, t) for t in self.space_a}
        self.pattern_b = {t: projection_pattern(B, t) for t in self.space_b}
        self.type_a = {t: atomic_type(t, (), omega, db=A) for t in self.space_a}
        self.type_b = {t: atomic_type(t, (), omega, db=B) for t in self.space_b}
        self.joint_a = {
            (u, v): atomic_type(u, v, omega, db=A)
            for u in self.space_a
            for v in self.space_a
        }
        self.joint_b = {
            (u, v): atomic_type(u, v, omega, db=B)
            for u in self.space_b
            for v in self.space_b
        }
        # candidate answers bucketed by (membership pattern, joint type with
        # the current configuration tuple on the answering side)
        self.answers_b: dict = {}
        for b in self.space_b:
            buckets: dict = {}
            for d in self.space_b:
                buckets.setdefault((self.pattern_b[d], self.joint_b[(b, d)]), []).append(d)
            self.answers_b[b] = buckets
        self.answers_a: dict = {}
        for a in self.space_a:
            buckets: dict = {}
            for c in self.space_a:
                buckets.setdefault((self.pattern_a[c], self.joint_a[(a, c)]), []).append(c)
            self.answers_a[a] = buckets

    def require_in_spaces(self, a: tuple, b: tuple):
        if a not in self.pattern_a:
            raise SemijoinError(f"tuple {a!r} is not in the left tuple space")
        if b not in self.pattern_b:
            raise SemijoinError(f"tuple {b!r} is not in the right tuple space")

    def round0(self) -> frozenset:
        buckets: dict = {}
        for b in self.space_b:
            buckets.setdefault((self.pattern_b[b], self.type_b[b]), []).append(b)
        configs = []
        for a in self.space_a:
            for b in buckets.get((self.pattern_a[a], self.type_a[a]), ()):
                configs.append(Config(a, b))
        return frozenset(configs)

    def defended(self, cfg: Config, region: frozenset) -> bool:
        """Every spoiler move from ``cfg`` has an answer with successor in ``region``."""
        a, b = cfg
        answers_b, answers_a = self.answers_b[b], self.answers_a[a]
        for c in self.space_a:
            bucket = answers_b.get((self.pattern_a[c], self.joint_a[(a, c)]))
            if not bucket or not any(Config(c, d) in region for d in bucket):
                return False
        for d in self.space_b:
            bucket = answers_a.get((self.pattern_b[d], self.joint_b[(b, d)]))
            if not bucket or not any(Config(c, d) in region for c in bucket):
                return False
        return True

    def refine(self, max_rounds: int | None = None) -> WinningRegion:
        rounds = [self.round0()]
        eliminated: dict[Config, int] = {}
        for a in self.space_a:
            for b in self.space_b:
                cfg = Config(a, b)
                if cfg not in rounds[0]:
                    eliminated[cfg] = 0
        r = 0
        while max_rounds is None or r < max_rounds:
            current = rounds[-1]
            survivors = []
            for cfg in current:
                if self.defended(cfg, current):
                    survivors.append(cfg)
                else:
                    eliminated[cfg] = r + 1
            nxt = frozenset(survivors)
            rounds.append(nxt)
            r += 1
            if nxt == current:
                break
        return WinningRegion(tuple(rounds), rounds[-1], eliminated)

    def legal_answers(self, cfg: Config, side: str, move: tuple) -> frozenset:
        a, b = cfg
        if side == "A":
            if move not in self.pattern_a:
                raise SemijoinError(f"move {move!r} is not in the left tuple space")
            bucket = self.answers_b[b].get(
                (self.pattern_a[move], self.joint_a[(a, move)]), ()
            )
            return frozenset(bucket)
        if side == "B":
            if move not in self.pattern_b:
                raise SemijoinError(f"move {move!r} is not in the right tuple space")
            bucket = self.answers_a[a].get(
                (self.pattern_b[move], self.joint_b[(b, move)]), ()
            )
            return frozenset(bucket)
        raise SemijoinError(f"side must be 'A' or 'B', got {side!r}")

    def successor(self, cfg: Config, side: str, move: tuple, answer: tuple) -> Config:
        return Config(move, answer) if side == "A" else Config(answer, move)


def wins_round0(
    A: Database, B: Database, a: Sequence[str], b: Sequence[str], omega: Omega = OMEGA_EQ
) -> bool:
    """Zero-round win: identical projection-membership patterns and equal
    atomic types.  Tuples of unequal arity always fail the pattern condition."""
    a, b = tuple(a), tuple(b)
    pair = GamePair(A, B, omega)
    pair.require_in_spaces(a, b)
    return pair.pattern_a[a] == pair.pattern_b[b] and pair.type_a[a] == pair.type_b[b]


def legal_answers(
    A: Database,
    B: Database,
    config: tuple,
    side: str,
    move: Sequence[str],
    omega: Omega = OMEGA_EQ,
) -> frozenset:
    """All duplicator answers to ``move`` played on ``side`` from ``config``."""
    cfg = Config(tuple(config[0]), tuple(config[1]))
    pair = GamePair(A, B, omega)
    pair.require_in_spaces(cfg.a, cfg.b)
    return pair.legal_answers(cfg, side, tuple(move))


def wins_m(
    A: Database,
    B: Database,
    a: Sequence[str],
    b: Sequence[str],
    m: int,
    omega: Omega = OMEGA_EQ,
    *,
    pair: GamePair | None = None,
) -> bool:
    """Membership of (a, b) in the m-round winning region."""
    if m < 0:
        raise SemijoinError("round count must be nonnegative")
    a, b = tuple(a), tuple(b)
    pair = pair if pair is not None else GamePair(A, B, omega)
    pair.require_in_spaces(a, b)
    region = pair.refine(max_rounds=m)
    return region.wins(a, b, m)


def winning_region_infinite(
    A: Database, B: Database, omega: Omega = OMEGA_EQ, *, pair: GamePair | None = None
) -> WinningRegion:
    """Greatest fixpoint of the round refinement, with elimination rounds."""
    pair = pair if pair is not None else GamePair(A, B, omega)
    return pair.refine()


@dataclass(frozen=True)
class Strategy:
    """Duplicator answers on the fixpoint: (config, side, move) -> answer."""

    answers: Mapping

    def answer(self, config: tuple, side: str, move: Sequence[str]) -> tuple:
        cfg = Config(tuple(config[0]), tuple(config[1]))
        return self.answers[(cfg, side, tuple(move))]


def duplicator_strategy(
    A: Database,
    B: Database,
    omega: Omega = OMEGA_EQ,
    *,
    pair: GamePair | None = None,
    region: WinningRegion | None = None,
) -> Strategy:
    """For every fixpoint configuration and spoiler move, the lexicographically
    least legal answer whose successor stays in the fixpoint."""
    pair = pair if pair is not None else GamePair(A, B, omega)
    region = region if region is not None else pair.refine()
    fix = region.fixpoint
    answers = {}
    for cfg in fix:
        for c in pair.space_a:
            good = [
                d
                for d in pair.legal_answers(cfg, "A", c)
                if Config(c, d) in fix
            ]
            if not good:
                raise SemijoinError(f"fixpoint config {cfg} has no answer to {c!r}")
            answers[(cfg, "A", c)] = min(good, key=pair.B.tuple_key)
        for d in pair.space_b:
            good = [
                c
                for c in pair.legal_answers(cfg, "B", d)
                if Config(c, d) in fix
            ]
            if not good:
                raise SemijoinError(f"fixpoint config {cfg} has no answer to {d!r}")
            answers[(cfg, "B", d)] = min(good, key=pair.A.tuple_key)
    return Strategy(answers)


# --- expression synthesis -------------------------------------------------------


class Synthesizer:
    """Builds, for tuples of one database, expressions whose membership test on
    any other database decides the r-round game.

    The r-level expression for a tuple intersects, over every potential
    spoiler move c in this database's tuple space, a semijoin requiring an
    answering tuple of the right joint type at level r-1; and subtracts, for
    every joint type theta realizable on the other side, the tuples for which
    some theta-move there defeats every locally available answer.  All
    sub-expressions are cached, so the result is a heavily shared DAG.
    """

    def __init__(self, db: Database, omega: Omega = OMEGA_EQ):
        self.db = db
        self.omega = omega
        self.space = sorted_tuple_space(db)
        self.pattern = {t: projection_pattern(db, t) for t in self.space}
        self.schema = db.schema
        self.max_arity = self.schema.max_arity()
        self._proj: dict = {}
        for name in self.schema.names():
            for size in range(self.schema.arity(name) + 1):
                for idx in itertools.combinations(
                    range(1, self.schema.arity(name) + 1), size
                ):
                    self._proj[(name, idx)] = sa.Projection(idx, sa.Relation(name))
        self._universal: dict[int, sa.SAExpr] = {}
        self._cache: dict = {}

    def universal(self, k: int) -> sa.SAExpr:
        if k not in self._universal:
            terms = [self._proj[key] for key in sorted(self._proj) if len(key[1]) == k]
            if not terms:
                raise SemijoinError(f"no relation of arity >= {k} in the schema")
            self._universal[k] = sa.union_all(terms)
        return self._universal[k]

    def complement(self, expr: sa.SAExpr, k: int) -> sa.SAExpr:
        return sa.Difference(self.universal(k), expr)

    def e0(self, a: Sequence[str]) -> sa.SAExpr:
        """Zero-round expression: tuples with a's membership pattern and type."""
        a = tuple(a)
        key = (a, 0)
        if key in self._cache:
            return self._cache[key]
        if a not in self.pattern:
            raise SemijoinError(f"tuple {a!r} is not in the tuple space")
        in_terms = [self._proj[key2] for key2 in sorted(self.pattern[a])]
        out_terms = [
            self._proj[(name, idx)]
            for (name, idx) in sorted(self._proj)
            if len(idx) == len(a) and (name, idx) not in self.pattern[a]
        ]
        expr = sa.intersect_all(in_terms)
        type_cond = atomic_type(a, (), self.omega, db=self.db).as_condition()
        if not isinstance(type_cond.root, CBool):
            expr = sa.Selection(type_cond, expr)
        if out_terms:
            expr = sa.Difference(expr, sa.union_all(out_terms))
        self._cache[key] = expr
        return expr

    def er(self, a: Sequence[str], r: int) -> sa.SAExpr:
        """r-round expression, built from the (r-1)-level family."""
        a = tuple(a)
        if r < 0:
            raise SemijoinError("round index must be nonnegative")
        if r == 0:
            return self.e0(a)
        key = (a, r)
        if key in self._cache:
            return self._cache[key]
        base = self.e0(a)
        n = len(a)

        # one semijoin per potential move in this database's own space
        move_terms = []
        for c in self.space:
            theta = atomic_type(a, c, self.omega, db=self.db).as_condition()
            move_terms.append(sa.Semijoin(theta, base, self.er(c, r - 1)))
        part1 = sa.intersect_all(move_terms)

        # types realizable by moves on the opposite side, by arity
        bad_terms = []
        for j in range(1, self.max_arity + 1):
            for theta in enumerate_atomic_types(n, j, self.omega):
                partners = [
                    c
                    for c in self.space
                    if len(c) == j and atomic_type(a, c, self.omega, db=self.db) == theta
                ]
                if partners:
                    blockers = sa.intersect_all(
                        [self.complement(self.er(c, r - 1), j) for c in partners]
                    )
                else:
                    blockers = self.universal(j)
                bad_terms.append(sa.Semijoin(theta.as_condition(), base, blockers))
        if bad_terms:
            part2 = sa.Difference(base, sa.union_all(bad_terms))
        else:
            part2 = base
        expr = sa.intersect(part1, part2)
        self._cache[key] = expr
        return expr


def synth_E0(A: Database, a: Sequence[str], omega: Omega = OMEGA_EQ) -> sa.SAExpr:
    """Expression containing a in A and containing b in any B exactly when
    (a, b) satisfies the zero-round win conditions."""
    return Synthesizer(A, omega).e0(a)


def synth_Er(A: Database, a: Sequence[str], r: int, omega: Omega = OMEGA_EQ) -> sa.SAExpr:
    """Expression containing a in A and containing b in any B exactly when the
    duplicator wins the r-round game from (a, b)."""
    return Synthesizer(A, omega).er(a, r)


def distinguish(
    A: Database,
    B: Database,
    a: Sequence[str],
    b: Sequence[str],
    omega: Omega = OMEGA_EQ,
    *,
    pair: GamePair | None = None,
    region: WinningRegion | None = None,
    synthesizer: Synthesizer | None = None,
) -> Optional[sa.SAExpr]:
    """A verified expression separating a from b, or None when the duplicator
    wins the infinite game from (a, b)."""
    a, b = tuple(a), tuple(b)
    pair = pair if pair is not None else GamePair(A, B, omega)
    pair.require_in_spaces(a, b)
    region = region if region is not None else pair.refine()
    cfg = Config(a, b)
    if cfg in region.fixpoint:
        return None
    rank = region.elimination_round[cfg]
    synth = synthesizer if synthesizer is not None else Synthesizer(A, omega)
    expr = synth.er(a, rank)
    if _separates(expr, A, B, a, b):
        return expr

    # Fallback for pure nonemptiness mismatches: anchor the zero-round
    # expression to a relation that is nonempty on exactly one side.
    base = synth.e0(a)
    for name in A.schema.names():
        empty_a = not A.relation(name)
        empty_b = not B.relation(name)
        if empty_a == empty_b:
            continue
        probe = sa.Semijoin(
            Condition(CBool(True), len(a), 0),
            base,
            sa.Projection((), sa.Relation(name)),
        )
        candidate = sa.Difference(base, probe) if empty_a else probe
        if _separates(candidate, A, B, a, b):
            return candidate
    raise SemijoinError(
        f"synthesis failed to separate {a!r} from {b!r} at rank {rank}; "
        "this indicates a solver or synthesis bug"
    )


def _separates(expr: sa.SAExpr, A: Database, B: Database, a: tuple, b: tuple) -> bool:
    return a in sa.eval_sa(expr, A) and b not in sa.eval_sa(expr, B)


# --- reports ---------------------------------------------------------------------


def region_report(
    pair: GamePair,
    region: WinningRegion,
    *,
    strategy: Strategy | None = None,
    expressions: Mapping | None = None,
) -> dict:
    """JSON-ready summary: tuple spaces, eliminations with ranks, fixpoint and,
    when supplied, the strategy table and synthesized expressions."""
    doc = {
        "tuple_space_a": [list(t) for t in pair.space_a],
        "tuple_space_b": [list(t) for t in pair.space_b],
        "rounds": len(region.rounds) - 1,
        "eliminated": [
            {"a": list(cfg.a), "b": list(cfg.b), "rank": rank}
            for cfg, rank in sorted(
                region.elimination_round.items(),
                key=lambda item: (item[1], item[0]),
            )
        ],
        "fixpoint": [
            {"a": list(cfg.a), "b": list(cfg.b)} for cfg in sorted(region.fixpoint)
        ],
    }
    if strategy is not None:
        doc["strategy"] = [
            {
                "config": {"a": list(cfg.a), "b": list(cfg.b)},
                "side": side,
                "move": list(move),
                "answer": list(answer),
            }
            for (cfg, side, move), answer in sorted(strategy.answers.items())
        ]
    if expressions is not None:
        doc["expressions"] = {
            key: sa.format_sa(expr) for key, expr in sorted(expressions.items())
        }
    return doc


# --- simulation (used by tests and the interactive mode) --------------------------


def play_random_game(
    pair: GamePair,
    region: WinningRegion,
    strategy: Strategy,
    start: Config,
    rounds: int,
    rng: random.Random,
) -> bool:
    """Play ``rounds`` random spoiler moves against the strategy; True when the
    duplicator's answers never leave the fixpoint."""
    cfg = start
    for _ in range(rounds):
        if rng.random() < 0.5:
            side, move = "A", rng.choice(pair.space_a)
        else:
            side, move = "B", rng.choice(pair.space_b)
        answer = strategy.answer(cfg, side, move)
        cfg = pair.successor(cfg, side, move, answer)
        if cfg not in region.fixpoint:
            return False
    return True
