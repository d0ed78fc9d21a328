"""Command-line front end: evaluation, translation, the game solver, corpus
emission, witness search, bounded satisfiability search and an interactive
game session.

Every command is deterministic given its inputs and seed; the environment
variable SEMIJOIN_LAB_SEED supplies the default seed.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from typing import Optional, Sequence

from . import corpus, game, gf, sa, translate
from .core import (
    Database,
    Omega,
    OMEGA_EQ,
    OMEGA_ORDERED,
    ParseError,
    Schema,
    SemijoinError,
    dump_database,
    load_database,
)

__all__ = ["main"]


def _default_seed() -> int:
    try:
        return int(os.environ.get("SEMIJOIN_LAB_SEED", "0"))
    except ValueError:
        return 0


def _read_file(path: str) -> str:
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _load_db(path: str) -> Database:
    return load_database(_read_file(path))


def parse_tuple(text: str) -> tuple:
    """Command-line tuple literal: comma-separated values in parentheses,
    "()" for the empty tuple."""
    text = text.strip()
    if not (text.startswith("(") and text.endswith(")")):
        raise SemijoinError(f"tuple literal must be parenthesized: {text!r}")
    inner = text[1:-1].strip()
    if not inner:
        return ()
    return tuple(part.strip() for part in inner.split(","))


def format_tuple(t: Sequence[str]) -> str:
    return "(" + ",".join(t) + ")"


def _print_result_set(result: frozenset, arity: int, db: Database):
    if arity == 0:
        print("true" if result else "false")
        return
    for t in sorted(result, key=db.tuple_key):
        print(format_tuple(t))


def _omega(args) -> Omega:
    return OMEGA_ORDERED if getattr(args, "omega", "eq") == "ordered" else OMEGA_EQ


# --- commands ---------------------------------------------------------------


def cmd_eval(args) -> int:
    db = _load_db(args.db)
    text = _read_file(args.expr_file) if args.expr_file else args.expr
    if text is None:
        raise SemijoinError("supply an expression or --expr-file")
    if args.language == "sa":
        expr = sa.parse_sa(text)
        arity, _ = sa.check_sa(expr, db.schema)
        _print_result_set(sa.eval_sa(expr, db), arity, db)
    else:
        phi = gf.parse_gf(text)
        if not gf.check_guarded(phi, db.schema):
            raise SemijoinError("formula is not guarded")
        variables = gf.natural_var_order(phi.free_vars)
        result = gf.gf_result_set(phi, db, variables)
        _print_result_set(result, len(variables), db)
    return 0


def cmd_translate(args) -> int:
    db = _load_db(args.db)
    text = _read_file(args.expr_file) if args.expr_file else args.expr
    if text is None:
        raise SemijoinError("supply an expression or --expr-file")
    if args.direction == "sa2gf":
        expr = sa.parse_sa(text)
        print(gf.format_gf(translate.sa_to_gf(expr, db.schema)))
        return 0
    phi = gf.parse_gf(text)
    if args.k is not None:
        k = args.k
    else:
        try:
            k = max((int(v[1:]) for v in phi.free_vars), default=0)
        except ValueError:
            raise SemijoinError(
                "free variables must be named x1..xk (or pass --k explicitly)"
            ) from None
    if args.rel is None:
        raise SemijoinError("gf2sa needs --rel, the anchor relation")
    if args.injection:
        try:
            mapping = {}
            for part in args.injection.split(","):
                i, _, p = part.partition(":")
                mapping[int(i)] = int(p)
            injection = tuple(mapping[i] for i in range(1, k + 1))
        except (ValueError, KeyError):
            raise SemijoinError(
                f"--injection must map every position 1..{k}, like 1:2,2:1"
            ) from None
    else:
        injection = tuple(range(1, k + 1))
    spec = translate.InjectionSpec(args.rel, injection)
    print(sa.format_sa(translate.gf_to_sa(phi, k, spec, db.schema)))
    return 0


def cmd_game(args) -> int:
    A, B = _load_db(args.db_a), _load_db(args.db_b)
    omega = _omega(args)
    start_a, start_b = parse_tuple(args.start_a), parse_tuple(args.start_b)
    pair = game.GamePair(A, B, omega)
    pair.require_in_spaces(start_a, start_b)
    rounds: Optional[int] = None if args.rounds == "inf" else int(args.rounds)
    region = pair.refine(max_rounds=rounds)
    cfg = game.Config(start_a, start_b)
    if rounds is None:
        duplicator_wins = cfg in region.fixpoint
    else:
        duplicator_wins = region.wins(start_a, start_b, rounds)
    rank = region.elimination_round.get(cfg)
    if duplicator_wins:
        print("DUPLICATOR")
    elif rank is not None:
        print(f"SPOILER (rank {rank})")
    else:
        print("SPOILER")
    if not args.quiet:
        print(
            f"tuple spaces: {len(pair.space_a)} x {len(pair.space_b)}; "
            f"refinement rounds: {len(region.rounds) - 1}",
            file=sys.stderr,
        )
    if args.report:
        strategy = None
        expressions = None
        if args.with_strategy and rounds is None:
            strategy = game.duplicator_strategy(A, B, omega, pair=pair, region=region)
        if args.with_expressions:
            synth = game.Synthesizer(A, omega)
            expressions = {}
            for eliminated in sorted(region.elimination_round):
                expr = game.distinguish(
                    A,
                    B,
                    eliminated.a,
                    eliminated.b,
                    omega,
                    pair=pair,
                    region=region,
                    synthesizer=synth,
                )
                key = f"a={format_tuple(eliminated.a)} b={format_tuple(eliminated.b)}"
                expressions[key] = expr
        doc = game.region_report(pair, region, strategy=strategy, expressions=expressions)
        with open(args.report, "w", encoding="utf-8") as handle:
            json.dump(doc, handle, indent=2, sort_keys=True)
            handle.write("\n")
    return 0


def cmd_distinguish(args) -> int:
    A, B = _load_db(args.db_a), _load_db(args.db_b)
    omega = _omega(args)
    start_a, start_b = parse_tuple(args.start_a), parse_tuple(args.start_b)
    expr = game.distinguish(A, B, start_a, start_b, omega)
    if expr is None:
        print("DUPLICATOR")
    else:
        print(sa.format_sa(expr))
    return 0


def cmd_corpus(args) -> int:
    instances = {inst.name: inst for inst in corpus.named_instances()}
    if args.action == "list":
        for inst in instances.values():
            print(f"{inst.name}: {inst.description}")
        return 0
    if args.name not in instances:
        raise SemijoinError(f"unknown corpus instance {args.name!r}")
    A, B = instances[args.name].build(m=args.m)
    if args.out_a or args.out_b:
        if not (args.out_a and args.out_b):
            raise SemijoinError("supply both --out-a and --out-b, or neither")
        with open(args.out_a, "w", encoding="utf-8") as handle:
            handle.write(dump_database(A) + "\n")
        with open(args.out_b, "w", encoding="utf-8") as handle:
            handle.write(dump_database(B) + "\n")
    else:
        doc = {"A": json.loads(dump_database(A)), "B": json.loads(dump_database(B))}
        print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def cmd_search(args) -> int:
    oracle = corpus.is_transitive if args.query == "transitive" else corpus.is_cartesian_closed
    found = corpus.find_witness_pair(
        oracle,
        oracle,
        max_values=args.max_values,
        seed=args.seed,
        max_candidates=args.max_candidates,
    )
    if found is None:
        print("none")
        return 0
    A, B = found
    doc = {
        "query": args.query,
        "certified": True,
        "A": json.loads(dump_database(A)),
        "B": json.loads(dump_database(B)),
    }
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def cmd_sat_search(args) -> int:
    schema_db = _load_db(args.schema)
    schema = schema_db.schema
    text = _read_file(args.expr_file) if args.expr_file else args.expr
    if text is None:
        raise SemijoinError("supply an expression or --expr-file")
    expr = sa.parse_sa(text)
    sa.check_sa(expr, schema)
    found = _bounded_sat_search(expr, schema, args.max_values, args.max_candidates)
    if found is None:
        print("none")
        return 0
    print(dump_database(found))
    return 0


def _bounded_sat_search(
    expr: sa.SAExpr, schema: Schema, max_values: int, max_candidates: int
) -> Optional[Database]:
    """Smallest-found satisfying database: value count first, then tuple count,
    then slot enumeration order."""
    width = len(str(max_values))
    budget = max_candidates
    for k in range(0, max_values + 1):
        values = [f"v{str(i).zfill(width)}" for i in range(1, k + 1)]
        slots = []
        for name in schema.names():
            arity = schema.arity(name)
            for t in itertools.product(values, repeat=arity):
                slots.append((name, t))
        slots.sort()
        for count in range(0, len(slots) + 1):
            for chosen in itertools.combinations(slots, count):
                budget -= 1
                if budget < 0:
                    return None
                contents = {name: set() for name in schema.names()}
                for name, t in chosen:
                    contents[name].add(t)
                db = Database(schema, {n: frozenset(r) for n, r in contents.items()})
                # skip databases that do not use the full value pool; they
                # were covered at a smaller value count
                if k and len(db.active_domain) != k:
                    continue
                if sa.eval_sa(expr, db):
                    return db
    return None


def cmd_repl(args) -> int:
    A, B = _load_db(args.db_a), _load_db(args.db_b)
    omega = _omega(args)
    pair = game.GamePair(A, B, omega)
    start = game.Config(parse_tuple(args.start_a), parse_tuple(args.start_b))
    pair.require_in_spaces(start.a, start.b)
    region = pair.refine()
    session = _ReplSession(pair, region, human_side=args.side)
    return session.run(start)


class _ReplSession:
    def __init__(self, pair: game.GamePair, region: game.WinningRegion, human_side: str):
        self.pair = pair
        self.region = region
        self.human_is_spoiler = human_side == "spoiler"

    def run(self, cfg: game.Config) -> int:
        print("interactive semijoin game; 'quit' to leave, 'help' for commands")
        self._show(cfg)
        if self.region.elimination_round.get(cfg) == 0:
            print("configuration fails the zero-round conditions: SPOILER wins")
            return 0
        round_no = 1
        while True:
            if self.human_is_spoiler:
                move = self._prompt_spoiler()
                if move is None:
                    print("bye")
                    return 0
                side, tup = move
                answer = self._machine_answer(cfg, side, tup)
                if answer is None:
                    print(f"round {round_no}: no legal answer -- SPOILER wins")
                    return 0
                print(f"round {round_no}: duplicator answers {format_tuple(answer)}")
                cfg = self.pair.successor(cfg, side, tup, answer)
            else:
                side, tup = self._machine_move(cfg)
                print(f"round {round_no}: spoiler plays {side} {format_tuple(tup)}")
                legal = sorted(self.pair.legal_answers(cfg, side, tup))
                if not legal:
                    print("no legal answer exists -- SPOILER wins")
                    return 0
                answer = self._prompt_duplicator(legal)
                if answer is None:
                    print("bye")
                    return 0
                cfg = self.pair.successor(cfg, side, tup, answer)
            self._show(cfg)
            round_no += 1

    def _show(self, cfg: game.Config):
        verdict = "alive" if cfg in self.region.fixpoint else "doomed"
        rank = self.region.elimination_round.get(cfg)
        note = f" (rank {rank})" if rank is not None else ""
        print(f"config: a={format_tuple(cfg.a)} b={format_tuple(cfg.b)} [{verdict}{note}]")

    def _prompt_spoiler(self):
        while True:
            line = _read_line("spoiler> ")
            if line is None or line.strip() == "quit":
                return None
            line = line.strip()
            if line == "help":
                print("moves: 'a (v1,v2)' or 'b (v)' pick a tuple in that database;")
                print("'quit' leaves the session")
                continue
            parts = line.split(None, 1)
            if len(parts) != 2 or parts[0] not in ("a", "b"):
                print("expected: a|b (tuple)")
                continue
            try:
                tup = parse_tuple(parts[1])
            except SemijoinError as exc:
                print(f"bad tuple: {exc}")
                continue
            side = "A" if parts[0] == "a" else "B"
            space = self.pair.pattern_a if side == "A" else self.pair.pattern_b
            if tup not in space:
                print(f"{format_tuple(tup)} is not in that tuple space")
                continue
            return side, tup

    def _prompt_duplicator(self, legal: list):
        while True:
            line = _read_line("duplicator> ")
            if line is None or line.strip() == "quit":
                return None
            line = line.strip()
            if line == "help":
                print("answer with a tuple literal, e.g. (v1,v2)")
                continue
            try:
                tup = parse_tuple(line)
            except SemijoinError as exc:
                print(f"bad tuple: {exc}")
                continue
            if tup not in legal:
                options = " ".join(format_tuple(t) for t in legal)
                print(f"illegal answer; legal answers: {options}")
                continue
            return tup

    def _machine_answer(self, cfg: game.Config, side: str, move: tuple):
        """Prefer answers that stay in the fixpoint, then maximal-rank successors."""
        legal = self.pair.legal_answers(cfg, side, move)
        if not legal:
            return None
        ranked = []
        other_db = self.pair.B if side == "A" else self.pair.A
        for answer in sorted(legal, key=other_db.tuple_key):
            nxt = self.pair.successor(cfg, side, move, answer)
            if nxt in self.region.fixpoint:
                return answer
            ranked.append((self.region.elimination_round[nxt], answer))
        ranked.sort(key=lambda item: -item[0])
        return ranked[0][1]

    def _machine_move(self, cfg: game.Config):
        """A rank-decreasing spoiler move when one exists, else the first move."""
        rank = self.region.elimination_round.get(cfg)
        if rank is not None and rank >= 1:
            prev = self.region.rounds[rank - 1]
            for side, space in (("A", self.pair.space_a), ("B", self.pair.space_b)):
                for move in space:
                    answers = self.pair.legal_answers(cfg, side, move)
                    if all(
                        self.pair.successor(cfg, side, move, d) not in prev
                        for d in answers
                    ):
                        return side, move
        return "A", self.pair.space_a[0]


def _read_line(prompt: str):
    try:
        return input(prompt)
    except EOFError:
        return None


# --- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semijoin-lab",
        description="semijoin algebra, guarded formulas and the distinguishing game",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate an expression or formula on a database")
    p.add_argument("--db", required=True, help="database document path")
    p.add_argument("--language", choices=("sa", "gf"), default="sa")
    p.add_argument("--expr-file", help="read the input from a file")
    p.add_argument("expr", nargs="?", help="expression/formula text")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("translate", help="translate between the algebra and the logic")
    p.add_argument("--direction", choices=("sa2gf", "gf2sa"), required=True)
    p.add_argument("--db", required=True, help="database document supplying the schema")
    p.add_argument("--rel", help="anchor relation (gf2sa)")
    p.add_argument("--injection", help="anchor injection, e.g. 1:2,2:1 (gf2sa)")
    p.add_argument("--k", type=int, help="result arity (gf2sa; default: inferred)")
    p.add_argument("--expr-file", help="read the input from a file")
    p.add_argument("expr", nargs="?", help="expression/formula text")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("game", help="solve the distinguishing game")
    p.add_argument("db_a")
    p.add_argument("db_b")
    p.add_argument("--rounds", default="inf", help="a round count or 'inf'")
    p.add_argument("--start-a", default="()", help="starting tuple in A")
    p.add_argument("--start-b", default="()", help="starting tuple in B")
    p.add_argument("--omega", choices=("eq", "ordered"), default="eq")
    p.add_argument("--report", help="write a JSON report to this path")
    p.add_argument("--with-strategy", action="store_true")
    p.add_argument("--with-expressions", action="store_true")
    p.add_argument("--quiet", action="store_true", help="print only the verdict")
    p.set_defaults(func=cmd_game)

    p = sub.add_parser("distinguish", help="synthesize a separating expression")
    p.add_argument("db_a")
    p.add_argument("db_b")
    p.add_argument("--start-a", default="()")
    p.add_argument("--start-b", default="()")
    p.add_argument("--omega", choices=("eq", "ordered"), default="eq")
    p.set_defaults(func=cmd_distinguish)

    p = sub.add_parser("corpus", help="list or emit built-in database pairs")
    p.add_argument("action", choices=("list", "emit"))
    p.add_argument("--name", help="instance name (emit)")
    p.add_argument("--m", type=int, default=3, help="size parameter where applicable")
    p.add_argument("--out-a", help="write database A here")
    p.add_argument("--out-b", help="write database B here")
    p.set_defaults(func=cmd_corpus)

    p = sub.add_parser("search", help="search for a certified inexpressibility witness")
    p.add_argument("--query", choices=("transitive", "cartesian"), required=True)
    p.add_argument("--max-values", type=int, default=8)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--max-candidates", type=int, default=400)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("sat-search", help="bounded satisfiability search")
    p.add_argument("--schema", required=True, help="database document supplying the schema")
    p.add_argument("--max-values", type=int, default=3)
    p.add_argument("--max-candidates", type=int, default=200000)
    p.add_argument("--expr-file", help="read the expression from a file")
    p.add_argument("expr", nargs="?", help="expression text")
    p.set_defaults(func=cmd_sat_search)

    p = sub.add_parser("repl", help="interactive game session")
    p.add_argument("db_a")
    p.add_argument("db_b")
    p.add_argument("--side", choices=("spoiler", "duplicator"), required=True)
    p.add_argument("--start-a", default="()")
    p.add_argument("--start-b", default="()")
    p.add_argument("--omega", choices=("eq", "ordered"), default="eq")
    p.set_defaults(func=cmd_repl)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SemijoinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
