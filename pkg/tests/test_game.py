import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import helpers
from semijoin_lab import corpus, sa
from semijoin_lab.core import (
    OMEGA_EQ,
    OMEGA_ORDERED,
    SemijoinError,
    make_db,
    tuple_space,
)
from semijoin_lab.game import (
    Config,
    GamePair,
    Synthesizer,
    distinguish,
    duplicator_strategy,
    legal_answers,
    play_random_game,
    synth_E0,
    synth_Er,
    winning_region_infinite,
    wins_m,
    wins_round0,
)


def two_singletons():
    return make_db({"S": [("a",)]}), make_db({"S": [("a",), ("b",)]})


def random_pair(seed, values=3, density=0.45):
    rng = random.Random(seed)
    schema = helpers.random_game_schema(rng)
    pool = ["a", "b", "c", "d"][:values]
    A = corpus.random_database(schema, pool, rng, density=density)
    B = corpus.random_database(schema, pool, rng, density=density)
    return A, B


class TestRound0:
    def test_fig1_empty_config(self):
        A, B = corpus.fig1_databases()
        assert wins_round0(A, B, (), ())

    def test_nonemptiness_pattern_differs(self):
        A = make_db({"S": [("a",)]})
        B = make_db({"S": []}, arities={"S": 1})
        with pytest.raises(SemijoinError):
            wins_round0(A, B, (), ())  # () is not even in B's tuple space

    def test_nonemptiness_among_two_relations(self):
        A = make_db({"S": [("a",)], "T": [("a",)]})
        B = make_db({"S": [("a",)], "T": []}, arities={"T": 1})
        assert not wins_round0(A, B, (), ())

    def test_type_mismatch(self):
        A = make_db({"R": [("v", "v")]})
        B = make_db({"R": [("u", "w")]})
        assert not wins_round0(A, B, ("v", "v"), ("u", "w"))

    def test_arity_mismatch_is_losing(self):
        A = make_db({"R": [("v", "v")]})
        B = make_db({"R": [("u", "w")]})
        assert not wins_round0(A, B, ("v", "v"), ("u",))


class TestLegalAnswers:
    def test_fig1_strategy_answer_is_legal(self):
        A, B = corpus.fig1_databases()
        answers = legal_answers(A, B, ((), ()), "A", ("a", "b"))
        assert ("g", "h") in answers

    def test_empty_tuple_move(self):
        A, B = corpus.fig1_databases()
        assert legal_answers(A, B, ((), ()), "A", ()) == {()}

    def test_type_forcing(self):
        A = make_db({"S": [("v",), ("u",)]})
        B = make_db({"S": [("p",), ("q",)]})
        answers = legal_answers(A, B, (("v",), ("p",)), "A", ("v",))
        assert answers == {("p",)}
        answers = legal_answers(A, B, (("v",), ("p",)), "A", ("u",))
        assert answers == {("q",)}

    @given(st.integers(0, 100_000))
    @settings(max_examples=50, deadline=None)
    def test_legal_answers_imply_round0(self, seed):
        rng = random.Random(seed)
        A, B = random_pair(seed)
        if not tuple_space(A) or not tuple_space(B):
            return
        pair = GamePair(A, B)
        region = pair.refine()
        if not region.rounds[0]:
            return
        cfg = rng.choice(sorted(region.rounds[0]))
        move = rng.choice(pair.space_a)
        for answer in pair.legal_answers(cfg, "A", move):
            assert wins_round0(A, B, move, answer)


class TestWinsM:
    def test_round0_equivalence(self):
        for seed in range(20):
            A, B = random_pair(seed)
            if not tuple_space(A) or not tuple_space(B):
                continue
            pair = GamePair(A, B)
            region = pair.refine(max_rounds=0)
            for a in pair.space_a[:5]:
                for b in pair.space_b[:5]:
                    assert region.wins(a, b, 0) == wins_round0(A, B, a, b)

    def test_ordered_instances(self):
        A, B = corpus.ordered_transitivity(3)
        assert wins_m(A, B, (), (), 1, OMEGA_ORDERED)

    def test_singleton_pair_dies_in_one_round(self):
        A, B = two_singletons()
        assert wins_m(A, B, ("a",), ("a",), 0)
        assert not wins_m(A, B, ("a",), ("a",), 1)

    def test_empty_config_rank_two(self):
        A, B = two_singletons()
        assert wins_m(A, B, (), (), 1)
        assert not wins_m(A, B, (), (), 2)

    @given(st.integers(0, 100_000))
    @settings(max_examples=40, deadline=None)
    def test_symmetry_of_roles(self, seed):
        A, B = random_pair(seed)
        if not tuple_space(A) or not tuple_space(B):
            return
        ab = GamePair(A, B).refine()
        ba = GamePair(B, A).refine()
        for cfg in list(ab.rounds[0])[:40]:
            for m in range(3):
                assert ab.wins(cfg.a, cfg.b, m) == ba.wins(cfg.b, cfg.a, m)

    @given(st.integers(0, 100_000))
    @settings(max_examples=40, deadline=None)
    def test_monotone_in_rounds(self, seed):
        A, B = random_pair(seed)
        if not tuple_space(A) or not tuple_space(B):
            return
        region = GamePair(A, B).refine()
        for cfg in list(region.rounds[0])[:40]:
            for m in range(1, len(region.rounds)):
                if region.wins(cfg.a, cfg.b, m):
                    assert region.wins(cfg.a, cfg.b, m - 1)


class TestInfiniteRegion:
    def test_fig1_contains_both_strategy_maps(self):
        A, B = corpus.fig1_databases()
        region = winning_region_infinite(A, B)
        f, g = corpus.fig1_strategy_maps()
        expected = {Config((), ())}
        expected |= {Config(k, v) for k, v in f.items()}
        expected |= {Config(k, v) for k, v in g.items()}
        assert expected <= region.fixpoint

    def test_identity_configs_survive(self):
        for seed in range(15):
            A, _ = random_pair(seed)
            if not tuple_space(A):
                continue
            region = winning_region_infinite(A, A)
            for t in tuple_space(A):
                assert Config(t, t) in region.fixpoint

    def test_singleton_elimination_round(self):
        A, B = two_singletons()
        region = winning_region_infinite(A, B)
        assert region.elimination_round[Config(("a",), ("a",))] == 1
        assert region.elimination_round[Config((), ())] == 2

    def test_fixpoint_is_post_fixpoint(self):
        for seed in range(15):
            A, B = random_pair(seed)
            if not tuple_space(A) or not tuple_space(B):
                continue
            pair = GamePair(A, B)
            region = pair.refine()
            survivors = frozenset(
                cfg for cfg in region.fixpoint if pair.defended(cfg, region.fixpoint)
            )
            assert survivors == region.fixpoint

    def test_rounds_antitone(self):
        A, B = random_pair(3)
        region = GamePair(A, B).refine()
        for earlier, later in zip(region.rounds, region.rounds[1:]):
            assert later <= earlier


class TestStrategy:
    def test_fig1_switch_to_second_map(self):
        A, B = corpus.fig1_databases()
        strategy = duplicator_strategy(A, B)
        answer = strategy.answer((("a", "c"), ("g", "l")), "A", ("b", "c"))
        assert answer == ("k", "l")

    def test_identity_answer_is_legal(self):
        A, _ = random_pair(1)
        if not tuple_space(A):
            A = make_db({"R": [("a", "b")]})
        pair = GamePair(A, A)
        region = pair.refine()
        strategy = duplicator_strategy(A, A, pair=pair, region=region)
        for t in pair.space_a:
            cfg = Config(t, t)
            for move in pair.space_a:
                assert move in pair.legal_answers(cfg, "A", move)
                answer = strategy.answer(cfg, "A", move)
                assert Config(move, answer) in region.fixpoint

    def test_thousand_random_plays_stay_in_fixpoint(self):
        A, B = corpus.fig1_databases()
        pair = GamePair(A, B)
        region = pair.refine()
        strategy = duplicator_strategy(A, B, pair=pair, region=region)
        rng = random.Random(0)
        for game_index in range(1000):
            assert play_random_game(
                pair, region, strategy, Config((), ()), rounds=6, rng=rng
            )


class TestSynthesis:
    def test_e0_membership_of_own_tuple(self):
        for seed in range(25):
            A, _ = random_pair(seed)
            if not tuple_space(A):
                continue
            synth = Synthesizer(A)
            ev = sa.Evaluator(A)
            for a in sorted(tuple_space(A)):
                assert a in ev.eval(synth.e0(a))

    def test_e0_characterizes_round0(self):
        for seed in range(12):
            A, B = random_pair(seed)
            if not tuple_space(A) or not tuple_space(B):
                continue
            synth = Synthesizer(A)
            ev = sa.Evaluator(B)
            pair = GamePair(A, B)
            for a in pair.space_a:
                result = ev.eval(synth.e0(a))
                for b in pair.space_b:
                    assert (b in result) == wins_round0(A, B, a, b)

    def test_unary_singleton_expression(self):
        A = make_db({"S": [("v",)]})
        expr = synth_E0(A, ("v",))
        B = make_db({"S": [("x",), ("y",)]})
        assert sa.eval_sa(expr, B) == {("x",), ("y",)}

    def test_er_characterizes_bounded_game(self):
        for seed in range(10):
            A, B = random_pair(seed)
            if not tuple_space(A) or not tuple_space(B):
                continue
            pair = GamePair(A, B)
            region = pair.refine(max_rounds=2)
            synth = Synthesizer(A)
            ev = sa.Evaluator(B)
            for a in pair.space_a:
                for r in (1, 2):
                    result = ev.eval(synth.er(a, r))
                    for b in pair.space_b:
                        assert (b in result) == region.wins(a, b, r), (a, b, r)

    def test_er_membership_of_own_tuple(self):
        for seed in range(8):
            A, _ = random_pair(seed)
            if not tuple_space(A):
                continue
            synth = Synthesizer(A)
            ev = sa.Evaluator(A)
            for a in sorted(tuple_space(A))[:6]:
                for r in (1, 2):
                    assert a in ev.eval(synth.er(a, r))

    def test_singleton_level1_exclusion(self):
        A, B = two_singletons()
        expr = synth_Er(A, ("a",), 1)
        assert ("a",) not in sa.eval_sa(expr, B)

    def test_synth_results_are_set_style(self):
        A, B = two_singletons()
        for expr in (synth_E0(A, ("a",)), synth_Er(A, ("a",), 1)):
            _, dialect = sa.check_sa(expr, A.schema)
            assert dialect.projection_style == sa.SET
        # with order in the vocabulary the conditions use order atoms
        C, _ = corpus.ordered_transitivity(3)
        expr = synth_E0(C, ((C.order[0]), (C.order[-1])), OMEGA_ORDERED)
        _, dialect = sa.check_sa(expr, C.schema)
        assert dialect.projection_style == sa.SET
        assert dialect.condition_class == sa.QF_OMEGA

    def test_round_trip_through_grammar(self):
        A, B = two_singletons()
        expr = synth_Er(A, (), 1)
        reparsed = sa.parse_sa(sa.format_sa(expr))
        assert sa.eval_sa(reparsed, A) == sa.eval_sa(expr, A)
        assert sa.eval_sa(reparsed, B) == sa.eval_sa(expr, B)


class TestDistinguish:
    def test_singleton_empty_config(self):
        A, B = two_singletons()
        expr = distinguish(A, B, (), ())
        assert expr is not None
        assert () in sa.eval_sa(expr, A)
        assert () not in sa.eval_sa(expr, B)
        # the classic witness agrees: a two-element set has a distinct pair
        classic = sa.Projection((), corpus.distinct_pair_expr("S"))
        assert sa.eval_sa(classic, A) == frozenset()
        assert sa.eval_sa(classic, B) == {()}

    def test_fig1_returns_nothing(self):
        A, B = corpus.fig1_databases()
        assert distinguish(A, B, (), ()) is None

    def test_random_pairs_with_small_rank(self):
        found = 0
        seed = 0
        while found < 25 and seed < 200:
            A, B = random_pair(seed)
            seed += 1
            if not tuple_space(A) or not tuple_space(B):
                continue
            pair = GamePair(A, B)
            region = pair.refine()
            synth = Synthesizer(A)
            for cfg, rank in sorted(region.elimination_round.items())[:3]:
                if rank > 2:
                    continue
                expr = distinguish(
                    A, B, cfg.a, cfg.b, pair=pair, region=region, synthesizer=synth
                )
                assert expr is not None
                assert cfg.a in sa.eval_sa(expr, A)
                assert cfg.b not in sa.eval_sa(expr, B)
                found += 1
        assert found >= 25

    def test_surviving_configs_never_distinguished(self):
        A, B = corpus.fig1_databases()
        region = winning_region_infinite(A, B)
        rng = random.Random(1)
        schema = A.schema
        exprs = [
            sa.random_expr(schema, 4, sa.Dialect(sa.SET, sa.QF_EQUALITY), seed=i)
            for i in range(500)
        ]
        eva, evb = sa.Evaluator(A), sa.Evaluator(B)
        results = [(eva.eval(e), evb.eval(e)) for e in exprs]
        for cfg in region.fixpoint:
            for ra, rb in results:
                assert (cfg.a in ra) == (cfg.b in rb)


class TestPropositionSoundness:
    @given(st.integers(0, 100_000))
    @settings(max_examples=25, deadline=None)
    def test_winning_configs_indistinguishable_at_depth(self, seed):
        A, B = random_pair(seed)
        if not tuple_space(A) or not tuple_space(B):
            return
        region = GamePair(A, B).refine(max_rounds=3)
        eva, evb = sa.Evaluator(A), sa.Evaluator(B)
        for m in range(4):
            exprs = [
                sa.random_expr(
                    A.schema, m, sa.Dialect(sa.SET, sa.QF_EQUALITY), seed=seed + i
                )
                for i in range(25)
            ]
            for cfg in region.rounds[min(m, len(region.rounds) - 1)]:
                for e in exprs:
                    assert (cfg.a in eva.eval(e)) == (cfg.b in evb.eval(e)), (
                        sa.format_sa(e),
                        cfg,
                        m,
                    )
