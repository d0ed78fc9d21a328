import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import helpers
from semijoin_lab import corpus, gf, sa, translate
from semijoin_lab.core import DialectError, Schema, SemijoinError
from semijoin_lab.translate import InjectionSpec, gf_sentence_to_sa0, gf_to_sa, sa_to_gf


SCHEMA = Schema({"R": 2, "S": 1, "T": 3})
VALUES = ["a", "b", "c", "d", "e"]


def random_db(rng, max_values=5):
    return corpus.random_database(
        SCHEMA, VALUES[: rng.randint(2, max_values)], rng, density=0.4
    )


class TestAlgebraToLogic:
    def test_relation_case(self):
        phi = sa_to_gf(sa.Relation("R"), SCHEMA)
        assert phi == gf.RelAtom("R", ("x1", "x2"))

    def test_union_case(self):
        expr = sa.Union(sa.Relation("S"), sa.Relation("S"))
        phi = sa_to_gf(expr, SCHEMA)
        assert isinstance(phi, gf.Or)
        assert phi.left == gf.RelAtom("S", ("x1",))

    def test_difference_case(self):
        expr = sa.Difference(sa.Relation("S"), sa.Relation("S"))
        phi = sa_to_gf(expr, SCHEMA)
        assert isinstance(phi, gf.And)
        assert isinstance(phi.right, gf.Not)

    def test_rejects_inequality_semijoin(self):
        expr = sa.parse_sa("semijoin[x1!=y1](rel S, rel S)")
        with pytest.raises(DialectError):
            sa_to_gf(expr, SCHEMA)

    def test_output_is_guarded(self):
        for seed in range(40):
            expr = sa.random_expr(
                SCHEMA, 3, sa.Dialect(sa.ORDERED, sa.EQ_CONJUNCTIVE), seed=seed
            )
            phi = sa_to_gf(expr, SCHEMA)
            assert gf.check_guarded(phi, SCHEMA)

    @given(st.integers(0, 100_000))
    @settings(max_examples=100, deadline=None)
    def test_round_trip_equals_evaluation(self, seed):
        rng = random.Random(seed)
        expr = sa.random_expr(
            SCHEMA, 3, sa.Dialect(sa.ORDERED, sa.EQ_CONJUNCTIVE), seed=seed
        )
        arity, _ = sa.check_sa(expr, SCHEMA)
        db = random_db(rng)
        phi = sa_to_gf(expr, SCHEMA)
        variables = [f"x{i}" for i in range(1, arity + 1)]
        assert gf.gf_result_set(phi, db, variables) == sa.eval_sa(expr, db)


class TestLogicToAlgebra:
    def test_equality_case_shape(self):
        phi = gf.parse_gf("x1 = x2")
        expr = gf_to_sa(phi, 2, InjectionSpec("R", (1, 2)), SCHEMA)
        assert isinstance(expr, sa.Selection)
        assert expr.operand == sa.Projection((1, 2), sa.Relation("R"))

    def test_negation_case_shape(self):
        phi = gf.parse_gf("!(x1 = x1)")
        expr = gf_to_sa(phi, 1, InjectionSpec("R", (2,)), SCHEMA)
        assert isinstance(expr, sa.Difference)
        assert expr.left == sa.Projection((2,), sa.Relation("R"))

    def test_output_dialect_is_conjunctive(self):
        for seed in range(40):
            rng = random.Random(seed)
            k = rng.randint(0, 2)
            phi = gf.random_formula(
                SCHEMA, free_variables=[f"x{i}" for i in range(1, k + 1)], depth=2, seed=seed
            )
            rel = rng.choice([n for n in SCHEMA.names() if SCHEMA.arity(n) >= k])
            mapping = tuple(rng.sample(range(1, SCHEMA.arity(rel) + 1), k))
            expr = gf_to_sa(phi, k, InjectionSpec(rel, mapping), SCHEMA)
            arity, dialect = sa.check_sa(expr, SCHEMA)
            assert arity == k
            assert dialect.condition_class == sa.EQ_CONJUNCTIVE

    def test_rejects_unguarded(self):
        phi = gf.GuardedExists(
            ("y",), gf.RelAtom("R", ("y", "y")), gf.RelAtom("S", ("x1",))
        )
        with pytest.raises(DialectError):
            gf_to_sa(phi, 1, InjectionSpec("R", (1,)), SCHEMA)

    def test_rejects_stray_free_variables(self):
        with pytest.raises(SemijoinError):
            gf_to_sa(gf.parse_gf("S(z)"), 1, InjectionSpec("R", (1,)), SCHEMA)

    def test_repeated_guard_variable(self):
        # the guard repeats a bound variable; a selection must pin the repetition
        phi = gf.parse_gf("exists z (R(z,z) & S(z))")
        expr = gf_to_sa(phi, 0, InjectionSpec("S", ()), SCHEMA)
        from semijoin_lab.core import make_db

        loop = make_db({"R": [("a", "a"), ("a", "b")], "S": [("a",)], "T": []},
                       arities={"T": 3})
        noloop = make_db({"R": [("a", "b")], "S": [("a",)], "T": []}, arities={"T": 3})
        assert sa.eval_sa(expr, loop) == {()}
        assert sa.eval_sa(expr, noloop) == frozenset()

    @given(st.integers(0, 100_000))
    @settings(max_examples=100, deadline=None)
    def test_round_trip_equals_anchored_query(self, seed):
        rng = random.Random(seed)
        k = rng.randint(0, 2)
        phi = gf.random_formula(
            SCHEMA, free_variables=[f"x{i}" for i in range(1, k + 1)], depth=2, seed=seed
        )
        rel = rng.choice([n for n in SCHEMA.names() if SCHEMA.arity(n) >= k])
        mapping = tuple(rng.sample(range(1, SCHEMA.arity(rel) + 1), k))
        expr = gf_to_sa(phi, k, InjectionSpec(rel, mapping), SCHEMA)
        db = random_db(rng)
        assert sa.eval_sa(expr, db) == helpers.anchored_query_naive(
            phi, db, k, rel, mapping
        )


class TestSentences:
    def test_true_sentence(self):
        from semijoin_lab.core import make_db

        db = make_db({"S": [("a",)], "R": [], "T": []}, arities={"R": 2, "T": 3})
        phi = gf.parse_gf("exists y (S(y) & y = y)")
        expr = gf_sentence_to_sa0(phi, "S", SCHEMA)
        assert sa.eval_sa(expr, db) == {()}

    def test_negated_sentence(self):
        from semijoin_lab.core import make_db

        db = make_db({"S": [("a",)], "R": [], "T": []}, arities={"R": 2, "T": 3})
        phi = gf.parse_gf("!exists y (S(y) & y = y)")
        expr = gf_sentence_to_sa0(phi, "S", SCHEMA)
        assert sa.eval_sa(expr, db) == frozenset()

    def test_rejects_open_formulas(self):
        with pytest.raises(SemijoinError):
            gf_sentence_to_sa0(gf.parse_gf("S(x1)"), "S", SCHEMA)

    @given(st.integers(0, 100_000))
    @settings(max_examples=80, deadline=None)
    def test_sentence_agreement_on_nonempty_databases(self, seed):
        rng = random.Random(seed)
        phi = gf.random_formula(SCHEMA, free_variables=(), depth=2, seed=seed)
        db = random_db(rng)
        nonempty = [n for n in SCHEMA.names() if db.relation(n)]
        if not nonempty:
            return
        rel = rng.choice(nonempty)
        expr = gf_sentence_to_sa0(phi, rel, SCHEMA)
        assert bool(sa.eval_sa(expr, db)) == helpers.eval_gf_naive(phi, db, {})


class TestInjectionSpec:
    def test_rejects_repeats(self):
        with pytest.raises(SemijoinError):
            InjectionSpec("R", (1, 1))

    def test_rejects_out_of_range(self):
        with pytest.raises(Exception):
            InjectionSpec("R", (1, 3)).validate(SCHEMA)

    def test_arity_must_cover_k(self):
        with pytest.raises(SemijoinError):
            gf_to_sa(gf.parse_gf("x1 = x1"), 1, InjectionSpec("R", ()), SCHEMA)
