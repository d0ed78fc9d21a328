"""Semijoin-algebra expressions: syntax, dialects, evaluation and generators.

The algebra has relations, union, difference, selection, ordered duplicate-free
projection and the semijoin.  Set-style projection (ascending index lists) and
the condition classes are tracked as a dialect rather than enforced in the
syntax, so the same AST serves the restricted and the full language.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from ._scan import Scanner
from .core import (
    CAnd,
    CAtom,
    CBool,
    CNot,
    COr,
    Condition,
    Database,
    DialectError,
    Schema,
    SchemaError,
    SemijoinError,
    compile_condition,
    conjunction,
)

__all__ = [
    "Relation",
    "Union",
    "Difference",
    "Selection",
    "Projection",
    "Semijoin",
    "SAExpr",
    "SET",
    "ORDERED",
    "EQ_CONJUNCTIVE",
    "QF_EQUALITY",
    "QF_OMEGA",
    "Dialect",
    "check_sa",
    "eval_sa",
    "Evaluator",
    "nesting_depth",
    "intersect",
    "intersect_all",
    "union_all",
    "universal_expr",
    "complement_within",
    "format_sa",
    "format_condition",
    "parse_sa",
    "parse_condition",
    "random_expr",
    "random_condition",
    "lemma1_check",
]


@dataclass(frozen=True)
class Relation:
    name: str


@dataclass(frozen=True)
class Union:
    left: "SAExpr"
    right: "SAExpr"


@dataclass(frozen=True)
class Difference:
    left: "SAExpr"
    right: "SAExpr"


@dataclass(frozen=True)
class Selection:
    condition: Condition
    operand: "SAExpr"


@dataclass(frozen=True)
class Projection:
    indices: tuple[int, ...]
    operand: "SAExpr"

    def __post_init__(self):
        idx = tuple(self.indices)
        if any(i < 1 for i in idx) or len(set(idx)) != len(idx):
            raise SemijoinError(f"projection indices must be distinct and 1-based: {idx}")
        object.__setattr__(self, "indices", idx)


@dataclass(frozen=True)
class Semijoin:
    condition: Condition
    left: "SAExpr"
    right: "SAExpr"


SAExpr = Relation | Union | Difference | Selection | Projection | Semijoin


# --- dialects ----------------------------------------------------------------

SET = "set"
ORDERED = "ordered"
EQ_CONJUNCTIVE = "eq-conjunctive"
QF_EQUALITY = "qf-equality"
QF_OMEGA = "qf-omega"

_PROJ_ORDER = {SET: 0, ORDERED: 1}
_COND_ORDER = {EQ_CONJUNCTIVE: 0, QF_EQUALITY: 1, QF_OMEGA: 2}


@dataclass(frozen=True)
class Dialect:
    """Projection style and condition class an expression stays within."""

    projection_style: str = SET
    condition_class: str = EQ_CONJUNCTIVE

    def __post_init__(self):
        if self.projection_style not in _PROJ_ORDER:
            raise SemijoinError(f"unknown projection style {self.projection_style!r}")
        if self.condition_class not in _COND_ORDER:
            raise SemijoinError(f"unknown condition class {self.condition_class!r}")

    def covers(self, other: "Dialect") -> bool:
        return (
            _PROJ_ORDER[self.projection_style] >= _PROJ_ORDER[other.projection_style]
            and _COND_ORDER[self.condition_class] >= _COND_ORDER[other.condition_class]
        )

    def join(self, other: "Dialect") -> "Dialect":
        proj = max(self.projection_style, other.projection_style, key=_PROJ_ORDER.get)
        cond = max(self.condition_class, other.condition_class, key=_COND_ORDER.get)
        return Dialect(proj, cond)


def _condition_class(cond: Condition, *, semijoin: bool) -> str:
    if cond.uses_order():
        return QF_OMEGA
    if semijoin and cond.equality_pairs() is None:
        return QF_EQUALITY
    return EQ_CONJUNCTIVE


def check_sa(expr: SAExpr, schema: Schema) -> tuple[int, Dialect]:
    """Validate an expression against a schema; return its arity and the least
    dialect containing it."""

    def walk(e) -> tuple[int, Dialect]:
        if isinstance(e, Relation):
            return schema.arity(e.name), Dialect()
        if isinstance(e, (Union, Difference)):
            n1, d1 = walk(e.left)
            n2, d2 = walk(e.right)
            if n1 != n2:
                op = "union" if isinstance(e, Union) else "diff"
                raise SchemaError(f"{op} operands have arities {n1} and {n2}")
            return n1, d1.join(d2)
        if isinstance(e, Selection):
            n, d = walk(e.operand)
            if e.condition.right_arity != 0:
                raise SchemaError("selection condition references right positions")
            if e.condition.left_arity > n:
                raise SchemaError(
                    f"selection condition references x{e.condition.left_arity} "
                    f"on an arity-{n} operand"
                )
            return n, d.join(Dialect(SET, _condition_class(e.condition, semijoin=False)))
        if isinstance(e, Projection):
            n, d = walk(e.operand)
            if any(i > n for i in e.indices):
                raise SchemaError(f"projection index out of range for arity {n}: {e.indices}")
            style = SET if all(a < b for a, b in zip(e.indices, e.indices[1:])) else ORDERED
            return len(e.indices), d.join(Dialect(style, EQ_CONJUNCTIVE))
        if isinstance(e, Semijoin):
            n1, d1 = walk(e.left)
            n2, d2 = walk(e.right)
            if e.condition.left_arity > n1 or e.condition.right_arity > n2:
                raise SchemaError(
                    f"semijoin condition needs arities "
                    f"({e.condition.left_arity}, {e.condition.right_arity}), "
                    f"operands have ({n1}, {n2})"
                )
            cls = _condition_class(e.condition, semijoin=True)
            return n1, d1.join(d2).join(Dialect(SET, cls))
        raise SemijoinError(f"not a semijoin-algebra expression: {e!r}")

    return walk(expr)


# --- evaluation ---------------------------------------------------------------

class Evaluator:
    """Bottom-up evaluator with a memo table keyed on subexpression identity.

    Synthesized expressions share subtrees heavily, so one evaluator instance
    may be reused to evaluate many roots against the same database.  The memo
    is private to the instance; nothing global is mutated.
    """

    def __init__(self, db: Database):
        self.db = db
        self._memo: dict[int, tuple[SAExpr, frozenset]] = {}

    def eval(self, expr: SAExpr) -> frozenset:
        memo = self._memo
        hit = memo.get(id(expr))
        if hit is not None:
            return hit[1]
        e = expr
        if isinstance(e, Relation):
            result = self.db.relation(e.name)
        elif isinstance(e, Union):
            result = self.eval(e.left) | self.eval(e.right)
        elif isinstance(e, Difference):
            result = self.eval(e.left) - self.eval(e.right)
        elif isinstance(e, Selection):
            operand = self.eval(e.operand)
            cond = compile_condition(e.condition, self.db.compare)
            result = frozenset(t for t in operand if cond(t, ()))
        elif isinstance(e, Projection):
            operand = self.eval(e.operand)
            idx = e.indices
            result = frozenset(tuple(t[i - 1] for i in idx) for t in operand)
        elif isinstance(e, Semijoin):
            left = self.eval(e.left)
            right = self.eval(e.right)
            cond = compile_condition(e.condition, self.db.compare)
            result = frozenset(a for a in left if any(cond(a, b) for b in right))
        else:
            raise SemijoinError(f"not a semijoin-algebra expression: {e!r}")
        memo[id(expr)] = (expr, result)
        return result


def eval_sa(expr: SAExpr, db: Database) -> frozenset:
    """Evaluate under exact set semantics.  The expression should check
    against the database's schema."""
    return Evaluator(db).eval(expr)


def nesting_depth(expr: SAExpr) -> int:
    """Maximum number of semijoin/projection nodes on any root-to-leaf path."""
    if isinstance(expr, Relation):
        return 0
    if isinstance(expr, (Union, Difference)):
        return max(nesting_depth(expr.left), nesting_depth(expr.right))
    if isinstance(expr, Selection):
        return nesting_depth(expr.operand)
    if isinstance(expr, Projection):
        return 1 + nesting_depth(expr.operand)
    if isinstance(expr, Semijoin):
        return 1 + max(nesting_depth(expr.left), nesting_depth(expr.right))
    raise SemijoinError(f"not a semijoin-algebra expression: {expr!r}")


# --- derived builders ---------------------------------------------------------

def intersect(left: SAExpr, right: SAExpr) -> SAExpr:
    """E1 n E2 as the derived expression E1 - (E1 - E2)."""
    return Difference(left, Difference(left, right))


def intersect_all(exprs: Sequence[SAExpr]) -> SAExpr:
    exprs = list(exprs)
    if not exprs:
        raise SemijoinError("empty intersection has no expression form")
    acc = exprs[0]
    for e in exprs[1:]:
        acc = intersect(acc, e)
    return acc


def union_all(exprs: Sequence[SAExpr]) -> SAExpr:
    exprs = list(exprs)
    if not exprs:
        raise SemijoinError("empty union has no expression form")
    acc = exprs[0]
    for e in exprs[1:]:
        acc = Union(acc, e)
    return acc


def universal_expr(schema: Schema, k: int) -> SAExpr:
    """Union of all ascending size-k projections of all relations: the arity-k
    slice of the tuple space."""
    terms = []
    for name in schema.names():
        arity = schema.arity(name)
        for idx in itertools.combinations(range(1, arity + 1), k):
            terms.append(Projection(idx, Relation(name)))
    if not terms:
        raise SemijoinError(f"no relation of arity >= {k} in the schema")
    return union_all(terms)


def complement_within(expr: SAExpr, k: int, schema: Schema) -> SAExpr:
    """Complement of an arity-k expression within the arity-k tuple space."""
    return Difference(universal_expr(schema, k), expr)


# --- printing -----------------------------------------------------------------

def format_condition(cond: Condition) -> str:
    # precedence: | = 1, & = 2, ! = 3; the parser associates to the left, so
    # right operands print one level tighter to keep round trips structural
    def fmt(node, min_prec: int) -> str:
        if isinstance(node, CBool):
            return "true" if node.value else "false"
        if isinstance(node, CAtom):
            return f"{node.lside}{node.lpos}{node.op}{node.rside}{node.rpos}"
        if isinstance(node, CNot):
            return "!" + fmt(node.inner, 3)
        if isinstance(node, CAnd):
            prec, sym = 2, "&"
        elif isinstance(node, COr):
            prec, sym = 1, "|"
        else:
            raise SemijoinError(f"not a condition node: {node!r}")
        body = f"{fmt(node.left, prec)} {sym} {fmt(node.right, prec + 1)}"
        return f"({body})" if prec < min_prec else body

    return fmt(cond.root, 0)


def format_sa(expr: SAExpr) -> str:
    if isinstance(expr, Relation):
        return f"rel {expr.name}"
    if isinstance(expr, Union):
        return f"union({format_sa(expr.left)}, {format_sa(expr.right)})"
    if isinstance(expr, Difference):
        return f"diff({format_sa(expr.left)}, {format_sa(expr.right)})"
    if isinstance(expr, Selection):
        return f"select[{format_condition(expr.condition)}]({format_sa(expr.operand)})"
    if isinstance(expr, Projection):
        idx = ",".join(str(i) for i in expr.indices)
        return f"project[{idx}]({format_sa(expr.operand)})"
    if isinstance(expr, Semijoin):
        return (
            f"semijoin[{format_condition(expr.condition)}]"
            f"({format_sa(expr.left)}, {format_sa(expr.right)})"
        )
    raise SemijoinError(f"not a semijoin-algebra expression: {expr!r}")


# --- parsing ------------------------------------------------------------------

_SA_TOKENS = [
    ("POSREF", r"[xy][0-9]+\b"),
    ("NAME", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("NUMBER", r"[0-9]+"),
    ("OP", r"<=|!=|<|=|&|\||!"),
    ("PUNCT", r"[()\[\],]"),
]


def _parse_cond_node(sc: Scanner) -> "CBool | CAtom | CNot | CAnd | COr":
    def atom():
        if sc.at("NAME", "true"):
            sc.take()
            return CBool(True)
        if sc.at("NAME", "false"):
            sc.take()
            return CBool(False)
        if sc.at("PUNCT", "("):
            sc.take()
            node = disj()
            sc.expect("PUNCT", ")")
            return node
        if sc.at("OP", "!"):
            sc.take()
            return CNot(atom())
        ref = sc.expect("POSREF")
        op = sc.expect("OP")
        if op not in ("=", "!=", "<", "<="):
            sc.error(f"expected a comparison operator, found {op!r}")
        ref2 = sc.expect("POSREF")
        return CAtom(ref[0], int(ref[1:]), op, ref2[0], int(ref2[1:]))

    def conj():
        node = atom()
        while sc.at("OP", "&"):
            sc.take()
            node = CAnd(node, atom())
        return node

    def disj():
        node = conj()
        while sc.at("OP", "|"):
            sc.take()
            node = COr(node, conj())
        return node

    return disj()


def parse_condition(text: str) -> Condition:
    """Parse a condition in the bracket grammar (atoms like ``x1=y2``)."""
    sc = Scanner(text, _SA_TOKENS)
    node = _parse_cond_node(sc)
    sc.expect_done()
    return Condition.infer(node)


def parse_sa(text: str) -> SAExpr:
    """Parse the expression grammar; arity checks are deferred to check_sa."""
    sc = Scanner(text, _SA_TOKENS)

    def expr() -> SAExpr:
        kind, value = sc.take()
        if kind != "NAME":
            sc.error(f"expected an expression keyword, found {value!r}")
        if value == "rel":
            name = sc.expect("NAME")
            return Relation(name)
        if value in ("union", "diff", "semijoin"):
            cond = None
            if value == "semijoin":
                sc.expect("PUNCT", "[")
                cond = Condition.infer(_parse_cond_node(sc))
                sc.expect("PUNCT", "]")
            sc.expect("PUNCT", "(")
            left = expr()
            sc.expect("PUNCT", ",")
            right = expr()
            sc.expect("PUNCT", ")")
            if value == "union":
                return Union(left, right)
            if value == "diff":
                return Difference(left, right)
            return Semijoin(cond, left, right)
        if value == "select":
            sc.expect("PUNCT", "[")
            cond = Condition.infer(_parse_cond_node(sc))
            sc.expect("PUNCT", "]")
            sc.expect("PUNCT", "(")
            operand = expr()
            sc.expect("PUNCT", ")")
            return Selection(cond, operand)
        if value == "project":
            sc.expect("PUNCT", "[")
            indices = []
            if not sc.at("PUNCT", "]"):
                indices.append(int(sc.expect("NUMBER")))
                while sc.at("PUNCT", ","):
                    sc.take()
                    indices.append(int(sc.expect("NUMBER")))
            sc.expect("PUNCT", "]")
            sc.expect("PUNCT", "(")
            operand = expr()
            sc.expect("PUNCT", ")")
            return Projection(tuple(indices), operand)
        sc.error(f"unknown expression keyword {value!r}")

    result = expr()
    sc.expect_done()
    return result


# --- random generation ----------------------------------------------------------

def random_condition(
    rng: random.Random,
    left_arity: int,
    right_arity: int,
    condition_class: str,
    *,
    semijoin: bool,
) -> Condition:
    """A random condition valid for the given arities inside the given class."""

    def eq_conjunction():
        if left_arity == 0 or right_arity == 0:
            return CBool(True)
        count = rng.randint(0, min(left_arity, right_arity))
        atoms = [
            CAtom("x", rng.randint(1, left_arity), "=", "y", rng.randint(1, right_arity))
            for _ in range(count)
        ]
        return conjunction(atoms)

    def ref():
        sides = ["x"] * left_arity + ["y"] * right_arity
        side = rng.choice(sides)
        pos = rng.randint(1, left_arity if side == "x" else right_arity)
        return side, pos

    def qf(depth: int):
        if left_arity + right_arity == 0:
            return CBool(rng.random() < 0.8)
        if depth == 0 or rng.random() < 0.5:
            ops = ["=", "!="]
            if condition_class == QF_OMEGA:
                ops += ["<", "<="]
            (ls, lp), (rs, rp) = ref(), ref()
            return CAtom(ls, lp, rng.choice(ops), rs, rp)
        pick = rng.random()
        if pick < 0.4:
            return CAnd(qf(depth - 1), qf(depth - 1))
        if pick < 0.8:
            return COr(qf(depth - 1), qf(depth - 1))
        return CNot(qf(depth - 1))

    if semijoin and condition_class == EQ_CONJUNCTIVE:
        node = eq_conjunction()
    else:
        # selection conditions may be arbitrary formulas even in the
        # conjunctive dialect; qf() adds order atoms only for QF_OMEGA
        node = qf(2)
    # inferred arities keep generated expressions in the printable normal form
    return Condition.infer(node)


def random_expr(
    schema: Schema,
    max_depth: int,
    dialect: Dialect = Dialect(SET, QF_EQUALITY),
    seed: int = 0,
    *,
    rng: random.Random | None = None,
) -> SAExpr:
    """A random well-formed expression within ``dialect`` whose nesting depth
    (semijoin/projection count) is at most ``max_depth``.  Deterministic for a
    fixed seed."""
    if not schema.relations:
        raise SchemaError("cannot generate expressions over an empty schema")
    rng = rng if rng is not None else random.Random(seed)
    names = schema.names()
    by_arity: dict[int, list[str]] = {}
    for name in names:
        by_arity.setdefault(schema.arity(name), []).append(name)

    def pick_indices(k: int, n: int) -> tuple[int, ...]:
        idx = rng.sample(range(1, n + 1), k)
        if dialect.projection_style == SET:
            idx.sort()
        else:
            rng.shuffle(idx)
        return tuple(idx)

    def gen(budget: int, size: int) -> tuple[SAExpr, int]:
        choices = ["rel", "rel", "select"]
        if size > 1:
            choices += ["union", "diff"]
            if budget > 0:
                choices += ["project", "semijoin", "semijoin"]
        what = rng.choice(choices)
        if what == "rel":
            name = rng.choice(names)
            return Relation(name), schema.arity(name)
        if what == "select":
            operand, n = gen(budget, size - 1)
            cond = random_condition(rng, n, 0, dialect.condition_class, semijoin=False)
            return Selection(cond, operand), n
        if what in ("union", "diff"):
            left, n = gen(budget, size // 2)
            right = gen_arity(n, budget, size // 2)
            node = Union(left, right) if what == "union" else Difference(left, right)
            return node, n
        if what == "project":
            operand, n = gen(budget - 1, size - 1)
            k = rng.randint(0, n)
            return Projection(pick_indices(k, n), operand), k
        left, n = gen(budget - 1, size // 2)
        right, m = gen(budget - 1, size // 2)
        cond = random_condition(rng, n, m, dialect.condition_class, semijoin=True)
        return Semijoin(cond, left, right), n

    def gen_arity(k: int, budget: int, size: int) -> SAExpr:
        matching = by_arity.get(k)
        if matching and rng.random() < 0.7:
            return Relation(rng.choice(matching))
        if budget > 0:
            wider = [n for n in names if schema.arity(n) >= k]
            if wider:
                name = rng.choice(wider)
                return Projection(pick_indices(k, schema.arity(name)), Relation(name))
        if matching:
            return Relation(rng.choice(matching))
        # fall back to a projected relation even if it costs a depth level
        wider = [n for n in names if schema.arity(n) >= k]
        if not wider:
            raise SchemaError(f"no relation of arity >= {k} to draw from")
        name = rng.choice(wider)
        return Projection(pick_indices(k, schema.arity(name)), Relation(name))

    size_budget = rng.randint(3, 10)
    expr, _ = gen(max_depth, size_budget)
    # the gen_arity fallback may exceed the depth budget; regenerate if so
    while nesting_depth(expr) > max_depth:
        expr, _ = gen(max_depth, size_budget)
    return expr


# --- structural property of the equality-conjunctive dialect --------------------

def lemma1_check(expr: SAExpr, db: Database) -> bool:
    """Every result tuple of an equality-conjunctive expression embeds
    injectively into some database tuple.  Verified by brute-force search
    over relations, stored tuples and injections."""
    _, dialect = check_sa(expr, db.schema)
    if dialect.condition_class != EQ_CONJUNCTIVE:
        raise DialectError(
            f"expected an eq-conjunctive expression, got {dialect.condition_class}"
        )
    result = eval_sa(expr, db)
    return all(_embeds_into_db(z, db) for z in result)


def _embeds_into_db(z: tuple, db: Database) -> bool:
    k = len(z)
    for name in db.schema.names():
        arity = db.schema.arity(name)
        if arity < k:
            continue
        for t in db.relation(name):
            for f in itertools.permutations(range(arity), k):
                if all(z[i] == t[f[i]] for i in range(k)):
                    return True
    return False
