import random

import pytest

from semijoin_lab import sa
from semijoin_lab.core import (
    OMEGA_ORDERED,
    SemijoinError,
    make_db,
    tuple_space,
)
from semijoin_lab.corpus import (
    at_least,
    distinct_pair_expr,
    fig1_databases,
    fig1_strategy_maps,
    find_witness_pair,
    functional_violation_expr,
    is_cartesian_closed,
    is_transitive,
    named_instances,
    ordered_transitivity,
    random_database,
)
from semijoin_lab.game import Config, GamePair


class TestFig1:
    def test_transitivity_split(self):
        A, B = fig1_databases()
        assert is_transitive(A)
        assert not is_transitive(B)

    def test_tuple_spaces_match_strategy_tables(self):
        A, B = fig1_databases()
        f, g = fig1_strategy_maps()
        assert set(f) == set(g) == tuple_space(A) - {()}
        assert set(f.values()) == set(g.values()) == tuple_space(B) - {()}
        assert len([t for t in f if len(t) == 1]) == 6
        assert len([t for t in f if len(t) == 2]) == 6

    def test_maps_are_bijections(self):
        f, g = fig1_strategy_maps()
        assert len(set(f.values())) == len(f)
        assert len(set(g.values())) == len(g)


class TestOrderedTransitivity:
    def test_m3_removed_tuple(self):
        A, B = ordered_transitivity(3)
        assert A.relation("R") - B.relation("R") == {("2", "5")}

    def test_oracle_split(self):
        for m in (3, 5):
            A, B = ordered_transitivity(m)
            assert is_transitive(A)
            assert not is_transitive(B)

    def test_block_count(self):
        for m in (3, 5, 7):
            A, _ = ordered_transitivity(m)
            assert len(A.relation("R")) == m * m + 2 * m

    def test_rejects_even(self):
        with pytest.raises(SemijoinError):
            ordered_transitivity(4)

    def test_order_declared_and_padded(self):
        A, _ = ordered_transitivity(5)
        assert A.order is not None
        assert list(A.order) == sorted(A.order)


class TestAtLeast:
    def test_base_case_is_relation(self):
        assert at_least(1) == sa.Relation("S")

    def test_counts_elements(self):
        db = make_db({"S": [("a",), ("b",), ("c",)]}, order=["a", "b", "c"])
        assert sa.eval_sa(at_least(3), db)
        assert not sa.eval_sa(at_least(4), db)

    def test_order_invariance(self):
        values = ["a", "b", "c", "d"]
        rng = random.Random(5)
        for _ in range(5):
            order = values[:]
            rng.shuffle(order)
            db = make_db({"S": [(v,) for v in values[:3]]}, order=order)
            assert bool(sa.eval_sa(at_least(3), db))
            assert not sa.eval_sa(at_least(4), db)

    def test_uses_order_dialect(self):
        _, dialect = sa.check_sa(at_least(2), make_db({"S": [("a",)]}).schema)
        assert dialect.condition_class == sa.QF_OMEGA


class TestDistinctPair:
    def test_single_element(self):
        db = make_db({"S": [("a",)]})
        assert sa.eval_sa(distinct_pair_expr(), db) == frozenset()

    def test_two_elements(self):
        db = make_db({"S": [("a",), ("b",)]})
        assert sa.eval_sa(distinct_pair_expr(), db)

    def test_random_cardinality_oracle(self):
        rng = random.Random(9)
        for _ in range(50):
            size = rng.randint(0, 5)
            values = [f"v{i}" for i in range(size)]
            db = make_db({"S": [(v,) for v in values]}, arities={"S": 1})
            assert bool(sa.eval_sa(distinct_pair_expr(), db)) == (size >= 2)


class TestFunctionalViolation:
    def test_two_images(self):
        db = make_db({"D": [("1", "2"), ("1", "3")]})
        assert sa.eval_sa(functional_violation_expr(), db)

    def test_functional(self):
        db = make_db({"D": [("1", "2"), ("2", "2")]})
        assert sa.eval_sa(functional_violation_expr(), db) == frozenset()

    def test_random_against_oracle(self):
        rng = random.Random(13)
        from semijoin_lab.core import Schema

        schema = Schema({"D": 2})
        for _ in range(100):
            db = random_database(schema, ["1", "2", "3"], rng, density=rng.uniform(0.1, 0.7))
            rows = db.relation("D")
            functional = all(
                y1 == y2 for (x1, y1) in rows for (x2, y2) in rows if x1 == x2
            )
            empty = not sa.eval_sa(functional_violation_expr(), db)
            assert empty == functional


class TestOracles:
    def test_transitive_examples(self):
        assert is_transitive(make_db({"R": [("1", "2"), ("2", "3"), ("1", "3")]}))
        assert not is_transitive(make_db({"R": [("1", "2"), ("2", "3")]}))

    def test_cartesian_examples(self):
        product = [(x, y) for x in "12" for y in "34"]
        assert is_cartesian_closed(make_db({"R": product}))
        assert not is_cartesian_closed(make_db({"R": product[:-1]}))

    def test_arity_guard(self):
        with pytest.raises(SemijoinError):
            is_transitive(make_db({"R": [("a",)]}))


class TestWitnessSearch:
    def test_transitivity_returns_certified_pair(self):
        found = find_witness_pair(is_transitive, is_transitive, seed=0)
        assert found is not None
        A, B = found
        assert is_transitive(A) and not is_transitive(B)
        region = GamePair(A, B).refine()
        assert Config((), ()) in region.fixpoint

    def test_cartesian_returns_certified_pair(self):
        found = find_witness_pair(is_cartesian_closed, is_cartesian_closed, seed=0)
        assert found is not None
        A, B = found
        assert is_cartesian_closed(A) and not is_cartesian_closed(B)
        assert len(A.active_domain) <= 8 and len(B.active_domain) <= 8
        region = GamePair(A, B).refine()
        assert Config((), ()) in region.fixpoint

    def test_impossible_budget_returns_none(self):
        def never(db):
            return False

        assert (
            find_witness_pair(never, never, seed=0, max_candidates=10) is None
        )


class TestNamedInstances:
    def test_listing(self):
        names = {inst.name for inst in named_instances()}
        assert names == {"fig1", "ordered-transitivity"}

    def test_builds_are_oracle_checked(self):
        for inst in named_instances():
            A, B = inst.build(m=3)
            assert tuple_space(A) and tuple_space(B)
