"""Finite string databases, quantifier-free conditions and atomic types.

Values are plain strings.  A database fixes a finite schema (relation name ->
arity), a finite set of tuples per relation and, optionally, a declared total
order on its universe; without a declared order values compare by code point.

Everything here is immutable after construction, so all operations are pure
and safe to call concurrently.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional, Sequence

__all__ = [
    "SemijoinError",
    "ParseError",
    "SchemaError",
    "DialectError",
    "Omega",
    "OMEGA_EQ",
    "OMEGA_ORDERED",
    "Schema",
    "Database",
    "make_db",
    "load_database",
    "dump_database",
    "tuple_space",
    "sorted_tuple_space",
    "projection_pattern",
    "CBool",
    "CAtom",
    "CNot",
    "CAnd",
    "COr",
    "Condition",
    "conjunction",
    "eval_condition",
    "compile_condition",
    "AtomicType",
    "atomic_type",
    "enumerate_atomic_types",
    "ATOMIC_TYPE_ARITY_CAP",
]


class SemijoinError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(SemijoinError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class SchemaError(SemijoinError):
    """Unknown relation, arity mismatch or malformed database content."""


class DialectError(SemijoinError):
    """Input falls outside the dialect an operation requires."""


# Names that would collide with grammar keywords or position references.
_RESERVED = frozenset(
    {"rel", "union", "diff", "select", "project", "semijoin", "true", "false", "exists"}
)


def _valid_relation_name(name: str) -> bool:
    if not name.isidentifier() or name in _RESERVED:
        return False
    # x1, y23, ... are reserved for condition position references
    if name[0] in "xy" and name[1:].isdigit() and len(name) > 1:
        return False
    return True


@dataclass(frozen=True)
class Omega:
    """Condition vocabulary: equality is always present, a total order optionally."""

    has_order: bool = False


OMEGA_EQ = Omega(False)
OMEGA_ORDERED = Omega(True)


@dataclass(frozen=True)
class Schema:
    """Finite map from relation name to arity."""

    relations: Mapping[str, int]

    def __post_init__(self):
        rels = {}
        for name, arity in dict(self.relations).items():
            if not isinstance(name, str) or not _valid_relation_name(name):
                raise SchemaError(f"invalid relation name {name!r}")
            if not isinstance(arity, int) or arity < 0:
                raise SchemaError(f"invalid arity for relation {name!r}: {arity!r}")
            rels[name] = arity
        object.__setattr__(self, "relations", rels)

    def names(self) -> list[str]:
        return sorted(self.relations)

    def arity(self, name: str) -> int:
        try:
            return self.relations[name]
        except KeyError:
            raise SchemaError(f"unknown relation {name!r}") from None

    def max_arity(self) -> int:
        return max(self.relations.values(), default=0)

    def __contains__(self, name: str) -> bool:
        return name in self.relations

    def __eq__(self, other):
        return isinstance(other, Schema) and dict(self.relations) == dict(other.relations)


def _as_tuple(row: Sequence[str]) -> tuple[str, ...]:
    t = tuple(row)
    for v in t:
        if not isinstance(v, str):
            raise SchemaError(f"non-string value {v!r}")
    return t


@dataclass(frozen=True, eq=False)
class Database:
    """A finite database: schema, contents and an optional declared value order."""

    schema: Schema
    contents: Mapping[str, frozenset]
    order: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        contents = {}
        for name in self.schema.names():
            if name not in self.contents:
                raise SchemaError(f"missing contents for relation {name!r}")
        for name, rows in dict(self.contents).items():
            arity = self.schema.arity(name)
            normalized = set()
            for row in rows:
                t = _as_tuple(row)
                if len(t) != arity:
                    raise SchemaError(
                        f"relation {name!r} has arity {arity}, got tuple of length {len(t)}"
                    )
                normalized.add(t)
            contents[name] = frozenset(normalized)
        object.__setattr__(self, "contents", contents)

        rank = None
        if self.order is not None:
            order = tuple(self.order)
            if len(set(order)) != len(order):
                raise SchemaError("declared order contains duplicate values")
            object.__setattr__(self, "order", order)
            rank = {v: i for i, v in enumerate(order)}

        adom = set()
        for rows in contents.values():
            for t in rows:
                adom.update(t)
        if rank is not None:
            missing = adom - rank.keys()
            if missing:
                raise SchemaError(f"values not in declared order: {sorted(missing)}")

        # Per-database indexes used by the tuple-space game machinery.
        projections: dict[tuple[str, tuple[int, ...]], frozenset] = {}
        patterns: dict[tuple, set] = {}
        for name in self.schema.names():
            arity = self.schema.arity(name)
            rows = contents[name]
            for size in range(arity + 1):
                for idx in itertools.combinations(range(1, arity + 1), size):
                    proj = frozenset(tuple(t[i - 1] for i in idx) for t in rows)
                    projections[(name, idx)] = proj
                    for p in proj:
                        patterns.setdefault(p, set()).add((name, idx))
        object.__setattr__(self, "_rank", rank)
        object.__setattr__(self, "_adom", frozenset(adom))
        object.__setattr__(self, "_projections", projections)
        object.__setattr__(
            self, "_patterns", {t: frozenset(s) for t, s in patterns.items()}
        )
        space = frozenset(patterns)
        object.__setattr__(self, "_space", space)
        object.__setattr__(self, "_space_sorted", tuple(sorted(space, key=self.tuple_key)))

    def relation(self, name: str) -> frozenset:
        self.schema.arity(name)
        return self.contents[name]

    @property
    def active_domain(self) -> frozenset:
        return self._adom

    def value_key(self, v: str):
        if self._rank is not None:
            return self._rank[v]
        return v

    def tuple_key(self, t: Sequence[str]):
        return (len(t), tuple(self.value_key(v) for v in t))

    def compare(self, u: str, v: str) -> int:
        """Three-way comparison following the declared order, else code points."""
        a, b = self.value_key(u), self.value_key(v)
        return (a > b) - (a < b)

    def __eq__(self, other):
        return (
            isinstance(other, Database)
            and self.schema == other.schema
            and self.contents == other.contents
            and self.order == other.order
        )


def make_db(
    tuples_by_name: Mapping[str, Iterable[Sequence[str]]],
    *,
    arities: Mapping[str, int] | None = None,
    order: Sequence[str] | None = None,
) -> Database:
    """Convenience builder; arities are inferred from the first tuple unless given."""
    arities = dict(arities or {})
    contents = {}
    for name, rows in tuples_by_name.items():
        rows = [tuple(r) for r in rows]
        if name not in arities:
            if not rows:
                raise SchemaError(f"cannot infer arity of empty relation {name!r}")
            arities[name] = len(rows[0])
        contents[name] = rows
    schema = Schema(arities)
    return Database(schema, contents, tuple(order) if order is not None else None)


# --- database documents -----------------------------------------------------

def load_database(text: str) -> Database:
    """Parse a database document (JSON, see README for the format)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from None
    if not isinstance(doc, dict):
        raise ParseError("database document must be a JSON object")
    if "relations" not in doc or not isinstance(doc["relations"], dict):
        raise ParseError('database document needs a "relations" object')
    order = doc.get("order")
    if order is not None:
        if not isinstance(order, list) or not all(isinstance(v, str) for v in order):
            raise ParseError('"order" must be a list of strings')
    arities = {}
    contents = {}
    for name, entry in doc["relations"].items():
        if not isinstance(entry, dict) or "arity" not in entry:
            raise ParseError(f'relation {name!r} needs an "arity" field')
        arity = entry["arity"]
        if not isinstance(arity, int) or arity < 0:
            raise ParseError(f"relation {name!r} has invalid arity {arity!r}")
        rows = entry.get("tuples", [])
        if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
            raise ParseError(f'relation {name!r}: "tuples" must be a list of lists')
        arities[name] = arity
        contents[name] = [tuple(r) for r in rows]
    schema = Schema(arities)
    return Database(schema, contents, tuple(order) if order is not None else None)


def dump_database(db: Database) -> str:
    """Serialize a database back into the document format (canonical ordering)."""
    doc: dict = {}
    if db.order is not None:
        doc["order"] = list(db.order)
    doc["relations"] = {
        name: {
            "arity": db.schema.arity(name),
            "tuples": [list(t) for t in sorted(db.relation(name), key=db.tuple_key)],
        }
        for name in db.schema.names()
    }
    return json.dumps(doc, indent=2, sort_keys=True)


# --- tuple spaces -----------------------------------------------------------

def tuple_space(db: Database) -> frozenset:
    """All projections (over ascending index sets, including the empty one)
    of all relations of the database."""
    return db._space


def sorted_tuple_space(db: Database) -> tuple:
    """The tuple space in a deterministic order (arity, then component order)."""
    return db._space_sorted


def projection_pattern(db: Database, t: Sequence[str]) -> frozenset:
    """The set of (relation, index-set) pairs whose projection contains ``t``."""
    t = tuple(t)
    try:
        return db._patterns[t]
    except KeyError:
        raise SemijoinError(f"tuple {t!r} is not in the tuple space") from None


# --- conditions -------------------------------------------------------------

_OPS = ("=", "!=", "<", "<=")


@dataclass(frozen=True)
class CBool:
    value: bool


@dataclass(frozen=True)
class CAtom:
    """Comparison between two tuple positions; sides are 'x' (left) / 'y' (right)."""

    lside: str
    lpos: int
    op: str
    rside: str
    rpos: int

    def __post_init__(self):
        if self.lside not in ("x", "y") or self.rside not in ("x", "y"):
            raise SemijoinError(f"bad condition side in {self!r}")
        if self.op not in _OPS:
            raise SemijoinError(f"bad condition operator {self.op!r}")
        if self.lpos < 1 or self.rpos < 1:
            raise SemijoinError("condition positions are 1-based")


@dataclass(frozen=True)
class CNot:
    inner: "CondNode"


@dataclass(frozen=True)
class CAnd:
    left: "CondNode"
    right: "CondNode"


@dataclass(frozen=True)
class COr:
    left: "CondNode"
    right: "CondNode"


CondNode = CBool | CAtom | CNot | CAnd | COr


def _cond_extents(node: CondNode) -> tuple[int, int]:
    if isinstance(node, CBool):
        return 0, 0
    if isinstance(node, CAtom):
        lx = node.lpos if node.lside == "x" else 0
        rx = node.rpos if node.rside == "x" else 0
        ly = node.lpos if node.lside == "y" else 0
        ry = node.rpos if node.rside == "y" else 0
        return max(lx, rx), max(ly, ry)
    if isinstance(node, CNot):
        return _cond_extents(node.inner)
    if isinstance(node, (CAnd, COr)):
        l1, r1 = _cond_extents(node.left)
        l2, r2 = _cond_extents(node.right)
        return max(l1, l2), max(r1, r2)
    raise SemijoinError(f"not a condition node: {node!r}")


@dataclass(frozen=True)
class Condition:
    """A quantifier-free condition over left positions x_i and right positions y_j.

    ``left_arity``/``right_arity`` record the smallest arities the condition can
    be evaluated against; every referenced position lies within them.
    """

    root: CondNode
    left_arity: int
    right_arity: int = 0

    def __post_init__(self):
        need_l, need_r = _cond_extents(self.root)
        if need_l > self.left_arity or need_r > self.right_arity:
            raise SemijoinError(
                f"condition references x{need_l}/y{need_r} beyond declared arities "
                f"({self.left_arity}, {self.right_arity})"
            )

    @classmethod
    def infer(cls, root: CondNode) -> "Condition":
        lx, ry = _cond_extents(root)
        return cls(root, lx, ry)

    def uses_order(self) -> bool:
        def walk(node):
            if isinstance(node, CAtom):
                return node.op in ("<", "<=")
            if isinstance(node, CNot):
                return walk(node.inner)
            if isinstance(node, (CAnd, COr)):
                return walk(node.left) or walk(node.right)
            return False

        return walk(self.root)

    def equality_pairs(self) -> Optional[list[tuple[int, int]]]:
        """If the condition is a conjunction of ``x_i = y_j`` atoms, return the
        (i, j) pairs (empty for the trivial condition); otherwise ``None``."""
        pairs: list[tuple[int, int]] = []

        def walk(node) -> bool:
            if isinstance(node, CBool):
                return node.value
            if isinstance(node, CAnd):
                return walk(node.left) and walk(node.right)
            if isinstance(node, CAtom) and node.op == "=":
                if node.lside == "x" and node.rside == "y":
                    pairs.append((node.lpos, node.rpos))
                    return True
                if node.lside == "y" and node.rside == "x":
                    pairs.append((node.rpos, node.lpos))
                    return True
            return False

        return pairs if walk(self.root) else None


def conjunction(atoms: Iterable[CondNode]) -> CondNode:
    """Right-to-left conjunction of the given nodes; empty yields ``true``."""
    atoms = list(atoms)
    if not atoms:
        return CBool(True)
    node = atoms[-1]
    for a in reversed(atoms[:-1]):
        node = CAnd(a, node)
    return node


def compile_condition(
    cond: Condition, compare: Callable[[str, str], int]
) -> Callable[[Sequence[str], Optional[Sequence[str]]], bool]:
    """Compile a condition into a closure; ``compare`` supplies the value order."""

    def comp(node):
        if isinstance(node, CBool):
            v = node.value
            return lambda l, r: v
        if isinstance(node, CAtom):
            li, ri = node.lpos - 1, node.rpos - 1
            lx, rx = node.lside == "x", node.rside == "x"
            op = node.op

            def get(l, r, use_left, i):
                return l[i] if use_left else r[i]

            if op == "=":
                return lambda l, r: get(l, r, lx, li) == get(l, r, rx, ri)
            if op == "!=":
                return lambda l, r: get(l, r, lx, li) != get(l, r, rx, ri)
            if op == "<":
                return lambda l, r: compare(get(l, r, lx, li), get(l, r, rx, ri)) < 0
            return lambda l, r: compare(get(l, r, lx, li), get(l, r, rx, ri)) <= 0
        if isinstance(node, CNot):
            f = comp(node.inner)
            return lambda l, r: not f(l, r)
        if isinstance(node, CAnd):
            f, g = comp(node.left), comp(node.right)
            return lambda l, r: f(l, r) and g(l, r)
        if isinstance(node, COr):
            f, g = comp(node.left), comp(node.right)
            return lambda l, r: f(l, r) or g(l, r)
        raise SemijoinError(f"not a condition node: {node!r}")

    return comp(cond.root)


def _default_compare(u: str, v: str) -> int:
    return (u > v) - (u < v)


def eval_condition(
    cond: Condition,
    left: Sequence[str],
    right: Optional[Sequence[str]] = None,
    *,
    db: Database | None = None,
) -> bool:
    """Evaluate a condition on a left tuple and an optional right tuple.

    The value order comes from ``db`` when given (declared order or code
    points), else from code points.
    """
    left = tuple(left)
    right = tuple(right) if right is not None else ()
    if len(left) < cond.left_arity or len(right) < cond.right_arity:
        raise SemijoinError(
            f"condition needs arities ({cond.left_arity}, {cond.right_arity}), "
            f"got ({len(left)}, {len(right)})"
        )
    compare = db.compare if db is not None else _default_compare
    return compile_condition(cond, compare)(left, right)


# --- atomic types -----------------------------------------------------------

ATOMIC_TYPE_ARITY_CAP = 8


@dataclass(frozen=True)
class AtomicType:
    """Complete comparison pattern of a (left, right) tuple pair.

    ``codes`` holds one entry per position pair (i, j), i < j, over the
    concatenated positions 0..n+m-1 in lexicographic pair order.  Without
    order the entries are 0 (equal) / 1 (distinct); with order they are the
    three-way comparison sign of the two components.
    """

    left_arity: int
    right_arity: int
    ordered: bool
    codes: tuple[int, ...]

    def __post_init__(self):
        n = self.left_arity + self.right_arity
        if len(self.codes) != n * (n - 1) // 2:
            raise SemijoinError("atomic type has wrong number of pair codes")

    def _pairs(self):
        n = self.left_arity + self.right_arity
        return itertools.combinations(range(n), 2)

    def is_consistent(self) -> bool:
        """Whether some assignment of values realizes this comparison pattern."""
        n = self.left_arity + self.right_arity
        m = [[0] * n for _ in range(n)]
        for (i, j), c in zip(self._pairs(), self.codes):
            if self.ordered:
                m[i][j], m[j][i] = c, -c
            else:
                m[i][j] = m[j][i] = 0 if c == 0 else 1
        if not self.ordered:
            # distinctness pattern must be an equivalence on the 0-codes
            for i in range(n):
                for j in range(n):
                    for k in range(n):
                        if i != j != k != i and m[i][j] == 0 and m[j][k] == 0 and m[i][k] != 0:
                            return False
            return True
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if i == j or j == k:
                        continue
                    if m[i][j] <= 0 and m[j][k] <= 0:
                        if m[i][k] > 0:
                            return False
                        if (m[i][j] < 0 or m[j][k] < 0) and m[i][k] >= 0:
                            return False
        return True

    def restrict_left(self) -> "AtomicType":
        """The type of the left tuple alone."""
        codes = [
            c
            for (i, j), c in zip(self._pairs(), self.codes)
            if j < self.left_arity
        ]
        return AtomicType(self.left_arity, 0, self.ordered, tuple(codes))

    def as_condition(self) -> Condition:
        """Render the type as a conjunction of position comparisons."""
        n = self.left_arity
        atoms = []

        def ref(p):
            return ("x", p + 1) if p < n else ("y", p - n + 1)

        for (i, j), c in zip(self._pairs(), self.codes):
            (si, pi), (sj, pj) = ref(i), ref(j)
            if c == 0:
                atoms.append(CAtom(si, pi, "=", sj, pj))
            elif not self.ordered:
                atoms.append(CAtom(si, pi, "!=", sj, pj))
            elif c < 0:
                atoms.append(CAtom(si, pi, "<", sj, pj))
            else:
                atoms.append(CAtom(sj, pj, "<", si, pi))
        return Condition(conjunction(atoms), self.left_arity, self.right_arity)


def atomic_type(
    left: Sequence[str],
    right: Sequence[str] = (),
    omega: Omega = OMEGA_EQ,
    *,
    db: Database | None = None,
) -> AtomicType:
    """The atomic type of ``left . right`` over the given vocabulary."""
    values = tuple(left) + tuple(right)
    compare = db.compare if db is not None else _default_compare
    codes = []
    for i, j in itertools.combinations(range(len(values)), 2):
        if omega.has_order:
            codes.append(compare(values[i], values[j]))
        else:
            codes.append(0 if values[i] == values[j] else 1)
    return AtomicType(len(left), len(right), omega.has_order, tuple(codes))


def _partitions(n: int):
    """Restricted growth strings: block label per position."""
    if n == 0:
        yield ()
        return

    def rec(prefix: list[int], top: int):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for b in range(top + 2):
            prefix.append(b)
            yield from rec(prefix, max(top, b))
            prefix.pop()

    yield from rec([], -1)


def enumerate_atomic_types(n: int, m: int, omega: Omega = OMEGA_EQ) -> tuple[AtomicType, ...]:
    """All consistent atomic types on arities (n, m): set partitions of the
    positions without order, weak orders with it."""
    total = n + m
    if total > ATOMIC_TYPE_ARITY_CAP:
        raise SemijoinError(
            f"arity {total} exceeds the atomic-type enumeration cap ({ATOMIC_TYPE_ARITY_CAP})"
        )
    pairs = list(itertools.combinations(range(total), 2))
    out = []
    for labels in _partitions(total):
        if not omega.has_order:
            codes = tuple(0 if labels[i] == labels[j] else 1 for i, j in pairs)
            out.append(AtomicType(n, m, False, codes))
            continue
        nblocks = max(labels, default=-1) + 1
        for perm in itertools.permutations(range(nblocks)):
            rank = [perm[b] for b in labels]
            codes = tuple(
                (rank[i] > rank[j]) - (rank[i] < rank[j]) for i, j in pairs
            )
            out.append(AtomicType(n, m, True, codes))
    out.sort(key=lambda t: t.codes)
    return tuple(out)
