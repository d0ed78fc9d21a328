"""Constructive translations between the restricted algebra and guarded logic.

``sa_to_gf`` turns an equality-conjunctive expression into a guarded formula
defining the same result set on every database.  ``gf_to_sa`` goes the other
way for queries anchored to a relation by an injective semijoin; taking the
nullary case gives the sentence/boolean-query correspondence.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import gf, sa
from .core import (
    CAtom,
    CBool,
    CNot,
    COr,
    CAnd,
    Condition,
    DialectError,
    Schema,
    SchemaError,
    SemijoinError,
    conjunction,
)

__all__ = ["InjectionSpec", "sa_to_gf", "gf_to_sa", "gf_sentence_to_sa0"]


@dataclass(frozen=True)
class InjectionSpec:
    """An injective map from result positions into the positions of a relation."""

    relation: str
    mapping: tuple[int, ...]

    def __post_init__(self):
        m = tuple(self.mapping)
        object.__setattr__(self, "mapping", m)
        if any(p < 1 for p in m) or len(set(m)) != len(m):
            raise SemijoinError(f"injection positions must be distinct and 1-based: {m}")

    def validate(self, schema: Schema):
        arity = schema.arity(self.relation)
        if any(p > arity for p in self.mapping):
            raise SchemaError(
                f"injection {self.mapping} exceeds arity {arity} of {self.relation!r}"
            )


def _xvars(k: int) -> list[str]:
    return [f"x{i}" for i in range(1, k + 1)]


# --- algebra to logic ----------------------------------------------------------


class _ToGF:
    def __init__(self, schema: Schema):
        self.schema = schema
        self._fresh = itertools.count(1)

    def fresh(self) -> str:
        return f"t{next(self._fresh)}"

    def verum(self, k: int) -> gf.GFFormula:
        if k >= 1:
            return gf.EqAtom("x1", "x1")
        probe = self._nonempty_probe()
        return gf.Or(probe, gf.Not(probe))

    def falsum(self, k: int) -> gf.GFFormula:
        if k >= 1:
            return gf.Not(gf.EqAtom("x1", "x1"))
        probe = self._nonempty_probe()
        return gf.And(probe, gf.Not(probe))

    def _nonempty_probe(self) -> gf.GFFormula:
        # any sentence will do as a truth-value carrier
        name = self.schema.names()[0]
        arity = self.schema.arity(name)
        if arity == 0:
            return gf.RelAtom(name, ())
        bound = [self.fresh() for _ in range(arity)]
        return gf.GuardedExists(
            tuple(bound), gf.RelAtom(name, tuple(bound)), gf.EqAtom(bound[0], bound[0])
        )

    def condition_formula(self, node, k: int) -> gf.GFFormula:
        if isinstance(node, CBool):
            return self.verum(k) if node.value else self.falsum(k)
        if isinstance(node, CAtom):
            left, right = f"x{node.lpos}", f"x{node.rpos}"
            if node.op == "=":
                return gf.EqAtom(left, right)
            if node.op == "!=":
                return gf.Not(gf.EqAtom(left, right))
            raise DialectError(f"order atom {node!r} has no guarded translation")
        if isinstance(node, CNot):
            return gf.Not(self.condition_formula(node.inner, k))
        if isinstance(node, CAnd):
            return gf.And(
                self.condition_formula(node.left, k), self.condition_formula(node.right, k)
            )
        if isinstance(node, COr):
            return gf.Or(
                self.condition_formula(node.left, k), self.condition_formula(node.right, k)
            )
        raise SemijoinError(f"not a condition node: {node!r}")

    def anchored_disjunction(
        self,
        inner: gf.GFFormula,
        inner_arity: int,
        pinned: dict[int, str],
        result_arity: int,
    ) -> gf.GFFormula:
        """Disjunction over relations R and injections f of

            exists (fresh positions) ( R(...) & inner(arguments at f) )

        where ``pinned`` fixes inner argument positions to outer variables and
        every other position of R is existentially bound.  This is the common
        engine of the projection and semijoin cases; completeness rests on the
        injective-embedding property of the dialect.
        """
        disjuncts = []
        for name in self.schema.names():
            arity = self.schema.arity(name)
            if arity < inner_arity:
                continue
            for f in itertools.permutations(range(1, arity + 1), inner_arity):
                terms: dict[int, str] = {}
                for pos_inner, var in pinned.items():
                    terms[f[pos_inner - 1]] = var
                bound = []
                for p in range(1, arity + 1):
                    if p not in terms:
                        v = self.fresh()
                        terms[p] = v
                        bound.append(v)
                args = tuple(terms[p] for p in range(1, arity + 1))
                guard = gf.RelAtom(name, args)
                inner_args = {
                    f"x{i}": terms[f[i - 1]] for i in range(1, inner_arity + 1)
                }
                body = gf.substitute(inner, inner_args)
                if bound:
                    disjuncts.append(gf.GuardedExists(tuple(bound), guard, body))
                else:
                    disjuncts.append(gf.And(guard, body))
        if not disjuncts:
            return self.falsum(result_arity)
        node = disjuncts[0]
        for d in disjuncts[1:]:
            node = gf.Or(node, d)
        return node

    def build(self, expr: sa.SAExpr) -> tuple[gf.GFFormula, int]:
        if isinstance(expr, sa.Relation):
            k = self.schema.arity(expr.name)
            return gf.RelAtom(expr.name, tuple(_xvars(k))), k
        if isinstance(expr, sa.Union):
            left, k = self.build(expr.left)
            right, _ = self.build(expr.right)
            return gf.Or(left, right), k
        if isinstance(expr, sa.Difference):
            left, k = self.build(expr.left)
            right, _ = self.build(expr.right)
            return gf.And(left, gf.Not(right)), k
        if isinstance(expr, sa.Selection):
            inner, k = self.build(expr.operand)
            cond = expr.condition.root
            if isinstance(cond, CBool) and cond.value:
                return inner, k
            return gf.And(inner, self.condition_formula(cond, k)), k
        if isinstance(expr, sa.Projection):
            inner, n = self.build(expr.operand)
            k = len(expr.indices)
            pinned = {idx: f"x{l}" for l, idx in enumerate(expr.indices, start=1)}
            # substitute into fresh argument slots: x_l pins position f(i_l)
            return self.anchored_disjunction(inner, n, pinned, k), k
        if isinstance(expr, sa.Semijoin):
            left, k = self.build(expr.left)
            inner, n = self.build(expr.right)
            pairs = expr.condition.equality_pairs()
            if pairs is None:
                raise DialectError(
                    "semijoin condition is not a conjunction of x=y equalities"
                )
            pinned: dict[int, str] = {}
            extras: list[gf.GFFormula] = []
            for i, j in pairs:
                if j in pinned:
                    extras.append(gf.EqAtom(pinned[j], f"x{i}"))
                else:
                    pinned[j] = f"x{i}"
            result = gf.And(left, self.anchored_disjunction(inner, n, pinned, k))
            for extra in extras:
                result = gf.And(result, extra)
            return result, k
        raise SemijoinError(f"not a semijoin-algebra expression: {expr!r}")


def sa_to_gf(expr: sa.SAExpr, schema: Schema) -> gf.GFFormula:
    """Translate an equality-conjunctive expression of arity k into a guarded
    formula over x1..xk with the same result set on every database."""
    _, dialect = sa.check_sa(expr, schema)
    if dialect.condition_class != sa.EQ_CONJUNCTIVE:
        raise DialectError(
            f"translation needs the eq-conjunctive dialect, got {dialect.condition_class}"
        )
    formula, _ = _ToGF(schema).build(expr)
    return formula


# --- logic to algebra ----------------------------------------------------------


class _ToSA:
    def __init__(self, schema: Schema):
        self.schema = schema
        self._fresh = itertools.count(1)

    def fresh_formals(self, count: int) -> list[str]:
        return [f"$v{next(self._fresh)}" for _ in range(count)]

    def translate(
        self,
        phi: gf.GFFormula,
        formals: list[str],
        anchor: sa.SAExpr,
        g: tuple[int, ...],
    ) -> sa.SAExpr:
        pos_of = {v: i for i, v in enumerate(formals, start=1)}
        domain = sa.Projection(g, anchor)
        k = len(formals)

        if isinstance(phi, gf.RelAtom):
            atoms = [
                CAtom("x", pos_of[arg], "=", "y", j)
                for j, arg in enumerate(phi.args, start=1)
            ]
            cond = Condition(conjunction(atoms), k, len(phi.args))
            return sa.Semijoin(cond, domain, sa.Relation(phi.name))
        if isinstance(phi, gf.EqAtom):
            cond = Condition(
                CAtom("x", pos_of[phi.left], "=", "x", pos_of[phi.right]), k, 0
            )
            return sa.Selection(cond, domain)
        if isinstance(phi, gf.Not):
            return sa.Difference(domain, self.translate(phi.inner, formals, anchor, g))
        if isinstance(phi, gf.Or):
            return sa.Union(
                self.translate(phi.left, formals, anchor, g),
                self.translate(phi.right, formals, anchor, g),
            )
        if isinstance(phi, gf.And):
            return sa.intersect(
                self.translate(phi.left, formals, anchor, g),
                self.translate(phi.right, formals, anchor, g),
            )
        if isinstance(phi, gf.Implies):
            return self.translate(
                gf.Or(gf.Not(phi.left), phi.right), formals, anchor, g
            )
        if isinstance(phi, gf.Iff):
            both = gf.And(phi.left, phi.right)
            neither = gf.And(gf.Not(phi.left), gf.Not(phi.right))
            return self.translate(gf.Or(both, neither), formals, anchor, g)
        if isinstance(phi, gf.GuardedExists):
            return self._exists(phi, formals, pos_of, domain)
        raise SemijoinError(f"not a formula: {phi!r}")

    def _exists(self, phi, formals, pos_of, domain) -> sa.SAExpr:
        guard = phi.guard
        arity = self.schema.arity(guard.name)
        occurrences: dict[str, list[int]] = {}
        for p, arg in enumerate(guard.args, start=1):
            occurrences.setdefault(arg, []).append(p)

        outer_vars = [
            v for v in dict.fromkeys(guard.args) if v in pos_of
        ]  # first-occurrence order
        r = len(outer_vars)
        bound_vars = list(phi.bound)
        stray = set(guard.args) - set(outer_vars) - set(bound_vars)
        if stray:
            raise SemijoinError(f"guard mentions unknown variables {sorted(stray)}")

        # repeated guard variables are pinned by a selection on the guard relation
        rep_atoms = []
        for var, positions in occurrences.items():
            for extra in positions[1:]:
                rep_atoms.append(CAtom("x", positions[0], "=", "x", extra))
        anchor2: sa.SAExpr = sa.Relation(guard.name)
        if rep_atoms:
            anchor2 = sa.Selection(Condition(conjunction(rep_atoms), arity, 0), anchor2)

        g2 = tuple(
            occurrences[v][0] for v in itertools.chain(outer_vars, bound_vars)
        )
        new_formals = self.fresh_formals(r + len(bound_vars))
        renaming = {v: new_formals[i] for i, v in enumerate(outer_vars)}
        renaming.update(
            {z: new_formals[r + i] for i, z in enumerate(bound_vars)}
        )
        body = gf.substitute(phi.body, renaming)
        inner = self.translate(body, new_formals, anchor2, g2)

        atoms = [
            CAtom("x", pos_of[v], "=", "y", j)
            for j, v in enumerate(outer_vars, start=1)
        ]
        cond = Condition(conjunction(atoms), len(pos_of), r + len(bound_vars))
        return sa.Semijoin(cond, domain, inner)


def gf_to_sa(
    phi: gf.GFFormula, k: int, spec: InjectionSpec, schema: Schema
) -> sa.SAExpr:
    """Translate a guarded formula over x1..xk, anchored to ``spec.relation``
    via the injection, into an equality-conjunctive expression computing

        { x : phi(x) } semijoined with the anchor relation on x_i = t_f(i).
    """
    if len(spec.mapping) != k:
        raise SemijoinError(f"injection has {len(spec.mapping)} positions, need {k}")
    spec.validate(schema)
    if not gf.check_guarded(phi, schema):
        raise DialectError("formula is not guarded")
    allowed = set(_xvars(k))
    stray = phi.free_vars - allowed
    if stray:
        raise SemijoinError(f"free variables outside x1..x{k}: {sorted(stray)}")
    phi = _freshen_bound(phi)
    translator = _ToSA(schema)
    return translator.translate(phi, _xvars(k), sa.Relation(spec.relation), spec.mapping)


def gf_sentence_to_sa0(phi: gf.GFFormula, relation: str, schema: Schema) -> sa.SAExpr:
    """Translate a sentence into a 0-ary expression: on databases where the
    anchor relation is nonempty, it evaluates to {()} exactly when the
    sentence is true."""
    if phi.free_vars:
        raise SemijoinError(f"not a sentence; free variables {sorted(phi.free_vars)}")
    return gf_to_sa(phi, 0, InjectionSpec(relation, ()), schema)


def _freshen_bound(phi: gf.GFFormula, counter=None) -> gf.GFFormula:
    """Rename every bound variable to a reserved fresh name so later free-variable
    substitutions can never capture."""
    if counter is None:
        counter = itertools.count(1)
    if isinstance(phi, (gf.RelAtom, gf.EqAtom)):
        return phi
    if isinstance(phi, gf.Not):
        return gf.Not(_freshen_bound(phi.inner, counter))
    if isinstance(phi, (gf.And, gf.Or, gf.Implies, gf.Iff)):
        return type(phi)(
            _freshen_bound(phi.left, counter), _freshen_bound(phi.right, counter)
        )
    if isinstance(phi, gf.GuardedExists):
        fresh = {z: f"$b{next(counter)}" for z in phi.bound}
        guard = gf.RelAtom(
            phi.guard.name, tuple(fresh.get(a, a) for a in phi.guard.args)
        )
        body = _freshen_bound(phi.body, counter)
        body = gf.substitute(body, fresh)
        return gf.GuardedExists(tuple(fresh[z] for z in phi.bound), guard, body)
    raise SemijoinError(f"not a formula: {phi!r}")
