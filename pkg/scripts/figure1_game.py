#!/usr/bin/env python3
"""Reproduce the transitivity inexpressibility witness.

Builds the paired six-element databases, shows the transitivity oracle split,
solves the infinite game, checks that both strategy bijections live inside the
computed fixpoint, and replays the strategy's switch move.
"""

from semijoin_lab import corpus, game, make_db, sa


def main():
    A, B = corpus.fig1_databases()
    print("A(R) =", sorted(A.relation("R")))
    print("B(R) =", sorted(B.relation("R")))
    print("transitive:", corpus.is_transitive(A), "/", corpus.is_transitive(B))

    pair = game.GamePair(A, B)
    region = pair.refine()
    start = game.Config((), ())
    verdict = "DUPLICATOR" if start in region.fixpoint else "SPOILER"
    print(f"infinite game from ((),()): {verdict}")
    print(f"fixpoint size: {len(region.fixpoint)} of {len(pair.space_a) * len(pair.space_b)} configs")

    f, g = corpus.fig1_strategy_maps()
    table_pairs = {start}
    table_pairs |= {game.Config(k, v) for k, v in f.items()}
    table_pairs |= {game.Config(k, v) for k, v in g.items()}
    print("strategy-table configs inside fixpoint:", table_pairs <= region.fixpoint)

    strategy = game.duplicator_strategy(A, B, pair=pair, region=region)
    cfg = (("a", "c"), ("g", "l"))
    move = ("b", "c")
    print(f"from a=(a,c) b=(g,l), spoiler plays (b,c); answer:", strategy.answer(cfg, "A", move))

    # perturb one side and watch the spoiler win with a synthesized witness
    broken = corpus.make_db({"R": sorted(B.relation("R"))[:-1]})
    expr = game.distinguish(A, broken, (), ())
    print("after dropping one edge of B, a separating expression exists:", expr is not None)
    if expr is not None:
        text = sa.format_sa(expr)
        print("witness (truncated):", text[:140], "..." if len(text) > 140 else "")


if __name__ == "__main__":
    main()
