"""Guarded first-order formulas with active-domain semantics.

Quantification is written ``exists y1,...,yk (Guard(...) & body)`` where the
guard is a single relation atom that mentions every bound variable and every
free variable of the body.  Evaluation iterates over guard-relation tuples
rather than over the full active domain, which is both the intended semantics
and the efficient choice.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from ._scan import Scanner
from .core import Database, Schema, SchemaError, SemijoinError

__all__ = [
    "RelAtom",
    "EqAtom",
    "Not",
    "And",
    "Or",
    "Implies",
    "Iff",
    "GuardedExists",
    "GFFormula",
    "free_vars",
    "check_guarded",
    "eval_gf",
    "gf_result_set",
    "format_gf",
    "parse_gf",
    "substitute",
    "natural_var_order",
    "random_formula",
]


@dataclass(frozen=True)
class RelAtom:
    name: str
    args: tuple[str, ...]
    free_vars: frozenset = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        object.__setattr__(self, "free_vars", frozenset(self.args))


@dataclass(frozen=True)
class EqAtom:
    left: str
    right: str
    free_vars: frozenset = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "free_vars", frozenset((self.left, self.right)))


@dataclass(frozen=True)
class Not:
    inner: "GFFormula"
    free_vars: frozenset = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "free_vars", self.inner.free_vars)


def _binary_free(left, right):
    return left.free_vars | right.free_vars


@dataclass(frozen=True)
class And:
    left: "GFFormula"
    right: "GFFormula"
    free_vars: frozenset = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "free_vars", _binary_free(self.left, self.right))


@dataclass(frozen=True)
class Or:
    left: "GFFormula"
    right: "GFFormula"
    free_vars: frozenset = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "free_vars", _binary_free(self.left, self.right))


@dataclass(frozen=True)
class Implies:
    left: "GFFormula"
    right: "GFFormula"
    free_vars: frozenset = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "free_vars", _binary_free(self.left, self.right))


@dataclass(frozen=True)
class Iff:
    left: "GFFormula"
    right: "GFFormula"
    free_vars: frozenset = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "free_vars", _binary_free(self.left, self.right))


@dataclass(frozen=True)
class GuardedExists:
    """``exists bound (guard & body)``.

    Structural requirements checked at construction: bound variables are
    distinct and every one of them occurs in the guard atom.  The semantic
    guard-coverage condition (free variables of the body occur in the guard)
    is the job of :func:`check_guarded`.
    """

    bound: tuple[str, ...]
    guard: RelAtom
    body: "GFFormula"
    free_vars: frozenset = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        bound = tuple(self.bound)
        object.__setattr__(self, "bound", bound)
        if len(set(bound)) != len(bound):
            raise SemijoinError(f"duplicate bound variables: {bound}")
        missing = set(bound) - set(self.guard.args)
        if missing:
            raise SemijoinError(
                f"bound variables {sorted(missing)} do not occur in the guard atom"
            )
        fv = (self.guard.free_vars | self.body.free_vars) - set(bound)
        object.__setattr__(self, "free_vars", fv)


GFFormula = RelAtom | EqAtom | Not | And | Or | Implies | Iff | GuardedExists


def free_vars(phi: GFFormula) -> frozenset:
    return phi.free_vars


def check_guarded(phi: GFFormula, schema: Schema) -> bool:
    """True iff every quantifier's guard covers the free variables of its body.

    Relation atoms are validated against the schema along the way; unknown
    names or arity mismatches raise :class:`SchemaError`.
    """
    if isinstance(phi, RelAtom):
        arity = schema.arity(phi.name)
        if len(phi.args) != arity:
            raise SchemaError(
                f"atom {phi.name} has {len(phi.args)} arguments, arity is {arity}"
            )
        return True
    if isinstance(phi, EqAtom):
        return True
    if isinstance(phi, Not):
        return check_guarded(phi.inner, schema)
    if isinstance(phi, (And, Or, Implies, Iff)):
        return check_guarded(phi.left, schema) and check_guarded(phi.right, schema)
    if isinstance(phi, GuardedExists):
        if not check_guarded(phi.guard, schema) or not check_guarded(phi.body, schema):
            return False
        return phi.body.free_vars <= set(phi.guard.args)
    raise SemijoinError(f"not a formula: {phi!r}")


# --- evaluation -----------------------------------------------------------------

class _GFEvaluator:
    """Recursive evaluation with a memo keyed on (node, relevant assignment)."""

    def __init__(self, db: Database):
        self.db = db
        self._memo: dict = {}

    def eval(self, phi: GFFormula, env: Mapping[str, str]) -> bool:
        key = (id(phi), tuple(sorted((v, env[v]) for v in phi.free_vars)))
        hit = self._memo.get(key)
        if hit is not None:
            return hit[1]
        result = self._eval(phi, env)
        self._memo[key] = (phi, result)
        return result

    def _eval(self, phi, env) -> bool:
        if isinstance(phi, RelAtom):
            return tuple(env[a] for a in phi.args) in self.db.relation(phi.name)
        if isinstance(phi, EqAtom):
            return env[phi.left] == env[phi.right]
        if isinstance(phi, Not):
            return not self.eval(phi.inner, env)
        if isinstance(phi, And):
            return self.eval(phi.left, env) and self.eval(phi.right, env)
        if isinstance(phi, Or):
            return self.eval(phi.left, env) or self.eval(phi.right, env)
        if isinstance(phi, Implies):
            return not self.eval(phi.left, env) or self.eval(phi.right, env)
        if isinstance(phi, Iff):
            return self.eval(phi.left, env) == self.eval(phi.right, env)
        if isinstance(phi, GuardedExists):
            bound = set(phi.bound)
            for t in self.db.relation(phi.guard.name):
                binding = dict(env)
                ok = True
                for arg, value in zip(phi.guard.args, t):
                    if arg in bound:
                        if arg in binding and binding[arg] != value:
                            ok = False
                            break
                        binding[arg] = value
                    elif env[arg] != value:
                        ok = False
                        break
                if ok and self.eval(phi.body, binding):
                    return True
            return False
        raise SemijoinError(f"not a formula: {phi!r}")


def eval_gf(phi: GFFormula, db: Database, assignment: Mapping[str, str]) -> bool:
    """First-order truth with quantifiers ranging over the active domain."""
    missing = phi.free_vars - assignment.keys()
    if missing:
        raise SemijoinError(f"unassigned free variables: {sorted(missing)}")
    adom = db.active_domain
    for v in phi.free_vars:
        if assignment[v] not in adom:
            raise SemijoinError(
                f"value {assignment[v]!r} for {v} is outside the active domain"
            )
    try:
        return _GFEvaluator(db).eval(phi, dict(assignment))
    except KeyError as exc:
        raise SemijoinError(
            f"variable {exc.args[0]!r} is never bound; formula is not guarded"
        ) from None


def gf_result_set(phi: GFFormula, db: Database, variables: Sequence[str]) -> frozenset:
    """All active-domain tuples over ``variables`` satisfying the formula."""
    variables = list(variables)
    if len(set(variables)) != len(variables):
        raise SemijoinError(f"duplicate result variables: {variables}")
    missing = phi.free_vars - set(variables)
    if missing:
        raise SemijoinError(f"result variables must cover free variables: {sorted(missing)}")
    adom = sorted(db.active_domain, key=db.value_key)
    evaluator = _GFEvaluator(db)
    out = []

    def assign(i: int, env: dict):
        if i == len(variables):
            if evaluator.eval(phi, env):
                out.append(tuple(env[v] for v in variables))
            return
        for value in adom:
            env[variables[i]] = value
            assign(i + 1, env)
        env.pop(variables[i], None)

    try:
        assign(0, {})
    except KeyError as exc:
        raise SemijoinError(
            f"variable {exc.args[0]!r} is never bound; formula is not guarded"
        ) from None
    return frozenset(out)


# --- printing ---------------------------------------------------------------------

_PREC = {"iff": 1, "implies": 2, "or": 3, "and": 4, "unary": 5}


def format_gf(phi: GFFormula) -> str:
    def fmt(node, parent: int) -> str:
        if isinstance(node, RelAtom):
            return f"{node.name}({', '.join(node.args)})"
        if isinstance(node, EqAtom):
            return f"{node.left} = {node.right}"
        if isinstance(node, Not):
            return "!" + fmt(node.inner, _PREC["unary"])
        if isinstance(node, GuardedExists):
            inner = f"{fmt(node.guard, 0)} & {fmt(node.body, _PREC['and'] + 1)}"
            return f"exists {', '.join(node.bound)} ({inner})"
        if isinstance(node, And):
            prec, sym = _PREC["and"], "&"
        elif isinstance(node, Or):
            prec, sym = _PREC["or"], "|"
        elif isinstance(node, Implies):
            prec, sym = _PREC["implies"], "->"
        elif isinstance(node, Iff):
            prec, sym = _PREC["iff"], "<->"
        else:
            raise SemijoinError(f"not a formula: {node!r}")
        left = fmt(node.left, prec + 1 if sym == "->" else prec)
        right = fmt(node.right, prec if sym == "->" else prec + 1)
        body = f"{left} {sym} {right}"
        return f"({body})" if prec < parent else body

    return fmt(phi, 0)


# --- parsing ----------------------------------------------------------------------

_GF_TOKENS = [
    ("NAME", r"[A-Za-z_][A-Za-z0-9_$]*"),
    ("OP", r"<->|->|&|\||!|="),
    ("PUNCT", r"[(),]"),
]


def parse_gf(text: str) -> GFFormula:
    """Parse the formula grammar; guard coverage is checked separately."""
    sc = Scanner(text, _GF_TOKENS)

    def atom_or_group():
        if sc.at("OP", "!"):
            sc.take()
            return Not(atom_or_group())
        if sc.at("NAME", "exists"):
            sc.take()
            bound = [sc.expect("NAME")]
            while sc.at("PUNCT", ","):
                sc.take()
                bound.append(sc.expect("NAME"))
            sc.expect("PUNCT", "(")
            guard = rel_atom()
            sc.expect("OP", "&")
            body = formula()
            sc.expect("PUNCT", ")")
            try:
                return GuardedExists(tuple(bound), guard, body)
            except SemijoinError as exc:
                sc.error(str(exc))
        if sc.at("PUNCT", "("):
            sc.take()
            node = formula()
            sc.expect("PUNCT", ")")
            return node
        name = sc.expect("NAME")
        if sc.at("PUNCT", "("):
            return rel_atom(name)
        sc.expect("OP", "=")
        other = sc.expect("NAME")
        return EqAtom(name, other)

    def rel_atom(name: str | None = None) -> RelAtom:
        if name is None:
            name = sc.expect("NAME")
        sc.expect("PUNCT", "(")
        args = []
        if not sc.at("PUNCT", ")"):
            args.append(sc.expect("NAME"))
            while sc.at("PUNCT", ","):
                sc.take()
                args.append(sc.expect("NAME"))
        sc.expect("PUNCT", ")")
        return RelAtom(name, tuple(args))

    def conjunction_level():
        node = atom_or_group()
        while sc.at("OP", "&"):
            sc.take()
            node = And(node, atom_or_group())
        return node

    def disjunction_level():
        node = conjunction_level()
        while sc.at("OP", "|"):
            sc.take()
            node = Or(node, conjunction_level())
        return node

    def implication_level():
        node = disjunction_level()
        if sc.at("OP", "->"):
            sc.take()
            return Implies(node, implication_level())
        return node

    def formula():
        node = implication_level()
        while sc.at("OP", "<->"):
            sc.take()
            node = Iff(node, implication_level())
        return node

    result = formula()
    sc.expect_done()
    return result


# --- substitution -------------------------------------------------------------------

def substitute(phi: GFFormula, mapping: Mapping[str, str]) -> GFFormula:
    """Simultaneously rename free occurrences of variables.

    The caller must ensure replacement names cannot collide with bound
    variables inside ``phi`` (the translators mint fresh bound names, so this
    holds by construction there).
    """
    if not mapping:
        return phi
    if isinstance(phi, RelAtom):
        return RelAtom(phi.name, tuple(mapping.get(a, a) for a in phi.args))
    if isinstance(phi, EqAtom):
        return EqAtom(mapping.get(phi.left, phi.left), mapping.get(phi.right, phi.right))
    if isinstance(phi, Not):
        return Not(substitute(phi.inner, mapping))
    if isinstance(phi, (And, Or, Implies, Iff)):
        return type(phi)(substitute(phi.left, mapping), substitute(phi.right, mapping))
    if isinstance(phi, GuardedExists):
        inner = {k: v for k, v in mapping.items() if k not in phi.bound}
        clash = set(inner.values()) & set(phi.bound)
        if clash:
            raise SemijoinError(f"substitution would capture bound variables {sorted(clash)}")
        return GuardedExists(
            phi.bound, substitute(phi.guard, inner), substitute(phi.body, inner)
        )
    raise SemijoinError(f"not a formula: {phi!r}")


_VAR_RE = re.compile(r"([A-Za-z_$]+)([0-9]*)$")


def natural_var_order(names: Iterable[str]) -> list[str]:
    """Sort variable names treating a trailing number numerically (x2 < x10)."""

    def key(name: str):
        m = _VAR_RE.match(name)
        if m and m.group(2):
            return (m.group(1), int(m.group(2)), name)
        return (name, -1, name)

    return sorted(names, key=key)


# --- random generation ----------------------------------------------------------------

def random_formula(
    schema: Schema,
    *,
    free_variables: Sequence[str] = (),
    depth: int = 2,
    seed: int = 0,
    rng: random.Random | None = None,
) -> GFFormula:
    """A random guarded formula with free variables among the given ones and
    quantifier nesting at most ``depth``.  Deterministic for a fixed seed."""
    if not schema.relations:
        raise SchemaError("cannot generate formulas over an empty schema")
    rng = rng if rng is not None else random.Random(seed)
    names = schema.names()
    guardable = [n for n in names if schema.arity(n) >= 1]
    taken = set(free_variables)
    counter = [0]

    def fresh() -> str:
        while True:
            counter[0] += 1
            name = f"v{counter[0]}"
            if name not in taken:
                return name

    def qf_atom(scope: list[str]):
        if scope and rng.random() < 0.4:
            return EqAtom(rng.choice(scope), rng.choice(scope))
        candidates = [n for n in names if schema.arity(n) == 0 or scope]
        if not candidates:
            return None
        name = rng.choice(candidates)
        arity = schema.arity(name)
        return RelAtom(name, tuple(rng.choice(scope) for _ in range(arity)))

    def exists(scope: list[str], budget: int):
        if not guardable:
            raise SchemaError("need a relation of positive arity to quantify over")
        guard_name = rng.choice(guardable)
        arity = schema.arity(guard_name)
        new_count = rng.randint(1, arity)
        new_vars = [fresh() for _ in range(new_count)]
        slots: list[str] = []
        pool = new_vars + (scope if scope else [])
        for _ in range(arity):
            slots.append(rng.choice(pool))
        # make sure every bound variable actually occurs in the guard
        positions = rng.sample(range(arity), new_count)
        for var, pos in zip(new_vars, positions):
            slots[pos] = var
        guard = RelAtom(guard_name, tuple(slots))
        body = gen(list(dict.fromkeys(slots)), budget - 1)
        return GuardedExists(tuple(new_vars), guard, body)

    def gen(scope: list[str], budget: int):
        roll = rng.random()
        if budget > 0 and roll < 0.35:
            return exists(scope, budget)
        if roll < 0.55:
            atom = qf_atom(scope)
            if atom is not None:
                return atom
            return exists(scope, max(budget, 1))
        a = gen(scope, budget)
        if roll < 0.7:
            return Not(a)
        b = gen(scope, budget)
        pick = rng.random()
        if pick < 0.4:
            return And(a, b)
        if pick < 0.8:
            return Or(a, b)
        if pick < 0.9:
            return Implies(a, b)
        return Iff(a, b)

    return gen(list(free_variables), depth)
