"""Command-line entry point: ``dsleader {punish,verify,solve,generate,export-smt}``.

Exit codes: 0 success / check passed / threshold met, 2 check failed /
threshold not met, 1 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .game import GameFormatError, format_rational, load_game, parse_rational, render_game
from .generators import FIGURES, gen_3sat, gen_figure, gen_random, parse_dimacs
from .memory import ProfileError, load_profile, render_profile
from .punish import punishment_values
from .search import OracleTooLarge, brute_force_oracle, decide_threshold, solve_optimal
from .smt import export_constraints
from .verify import MODES, classic_nash_check, rp_check

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


class _Printer:
    def __init__(self, approx: bool):
        self.approx = approx

    def q(self, x: Fraction) -> str:
        s = format_rational(x)
        if self.approx and Fraction(x).denominator != 1:
            s += f" (~{float(x):.6g}, display only)"
        return s


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except GameFormatError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _dump(doc) -> None:
    sys.stdout.write(json.dumps(doc, indent=2) + "\n")


def _stats_doc(stats) -> dict:
    return {
        "nodes": stats.nodes,
        "leaves": stats.leaves,
        "bound_prunes": stats.bound_prunes,
        "constraint_prunes": stats.constraint_prunes,
    }


def cmd_punish(args) -> int:
    g = load_game(args.game)
    table = punishment_values(g)
    if args.json:
        doc = {"values": {p: {v: format_rational(x) for v, x in row.items()} for p, row in table.values.items()}}
        if args.policies:
            doc["policies"] = table.policy
        _dump(doc)
        return EXIT_OK
    out = _Printer(args.approx)
    print("\t".join(["vertex", *g.players]))
    for v in g.vertices:
        print("\t".join([v.id, *(out.q(table(p, v.id)) for p in g.players)]))
    if args.policies:
        print()
        print("\t".join(["policy", *g.players]))
        for v in g.vertices:
            print("\t".join([v.id, *(table.policy[p][v.id] for p in g.players)]))
    return EXIT_OK


def cmd_verify(args) -> int:
    g = load_game(args.game)
    prof = load_profile(args.profile, g)
    report = rp_check(g, prof, args.mode)
    classic = classic_nash_check(g, prof) if args.classic else None
    passed = classic.passed if classic is not None else report.passed
    if args.json:
        doc = {
            "mode": report.mode,
            "passed": passed,
            "plays": {v: lasso.describe() for v, lasso in report.plays.items()},
            "payoffs": {p: format_rational(x) for p, x in report.payoffs.items()},
            "positions": [
                {
                    "start": c.start,
                    "index": c.index,
                    "vertex": c.state.vertex,
                    "memory": c.state.memory,
                    "owner": c.owner,
                    "tail": format_rational(c.tail),
                    "punishment": format_rational(c.punishment),
                    "constrained": c.constrained,
                    "ok": c.ok,
                }
                for c in report.positions
            ],
            "rp_passed": report.passed,
        }
        if classic is not None:
            doc["classic"] = {
                "passed": classic.passed,
                "on_path": {p: format_rational(x) for p, x in classic.on_path.items()},
                "best_response": {p: format_rational(x) for p, x in classic.best.items()},
            }
        _dump(doc)
        return EXIT_OK if passed else EXIT_FAIL
    out = _Printer(args.approx)
    for v, lasso in report.plays.items():
        print(f"play from {v}: {lasso.describe()}")
    print("payoffs: " + ", ".join(f"{p}={out.q(x)}" for p, x in report.payoffs.items()))
    for c in report.positions:
        if not c.constrained:
            continue
        flag = "ok" if c.ok else "VIOLATED"
        print(
            f"  start {c.start} pos {c.index} ({c.state.vertex},{c.state.memory}) owner {c.owner}: "
            f"tail {out.q(c.tail)} vs punishment {out.q(c.punishment)} {flag}"
        )
    print(f"{args.mode} reward-and-punish check: {'pass' if report.passed else 'fail'}")
    if classic is not None:
        for p in g.players:
            print(f"  {p}: on-path {out.q(classic.on_path[p])}, best response {out.q(classic.best[p])}")
        print(f"classic Nash check: {'pass' if classic.passed else 'fail'}")
    return EXIT_OK if passed else EXIT_FAIL


def cmd_solve(args) -> int:
    g = load_game(args.game)
    table = punishment_values(g)
    if args.threshold is not None:
        res = decide_threshold(g, args.memory, args.mode, args.threshold, table=table, threads=args.threads)
        witness, value, stats = res.witness, res.value, res.stats
    else:
        res = solve_optimal(g, args.memory, args.mode, table=table, threads=args.threads)
        witness, value, stats = res.witness, res.value, res.stats
    oracle = None
    if args.oracle:
        try:
            oracle = brute_force_oracle(g, args.memory, args.mode)
        except OracleTooLarge as exc:
            print(f"error: oracle refused: {exc}", file=sys.stderr)
            return EXIT_ERROR
    if witness is not None and args.witness_out:
        with open(args.witness_out, "w", encoding="utf-8") as fh:
            fh.write(render_profile(witness))
    report = rp_check(g, witness, args.mode, table) if witness is not None else None
    ok = args.threshold is None or res.satisfied
    if args.json:
        doc = {"mode": args.mode, "memory": args.memory}
        if args.threshold is not None:
            doc["threshold"] = format_rational(args.threshold)
            doc["satisfied"] = res.satisfied
        doc["value"] = None if value is None else format_rational(value)
        if report is not None:
            doc["plays"] = {v: lasso.describe() for v, lasso in report.plays.items()}
            doc["payoffs"] = {p: format_rational(x) for p, x in report.payoffs.items()}
            doc["witness"] = json.loads(render_profile(witness))
        if oracle is not None:
            doc["oracle"] = format_rational(oracle)
        doc["stats"] = _stats_doc(stats)
        _dump(doc)
    else:
        out = _Printer(args.approx)
        if args.threshold is not None:
            print(f"threshold {out.q(args.threshold)}: {'yes' if res.satisfied else 'no'}")
        if value is not None:
            print(f"value: {out.q(value)}")
        if report is not None:
            for v, lasso in report.plays.items():
                print(f"play from {v}: {lasso.describe()}")
            print("payoffs: " + ", ".join(f"{p}={out.q(x)}" for p, x in report.payoffs.items()))
        if oracle is not None:
            print(f"oracle: {out.q(oracle)}")
        print(
            f"stats: nodes={stats.nodes} leaves={stats.leaves} "
            f"bound_prunes={stats.bound_prunes} constraint_prunes={stats.constraint_prunes}"
        )
        if witness is not None and not args.witness_out:
            print("witness:")
            sys.stdout.write(render_profile(witness))
    if oracle is not None and args.threshold is None and oracle != value:
        print(f"error: oracle value {format_rational(oracle)} differs from search", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK if ok else EXIT_FAIL


def cmd_generate(args) -> int:
    if args.kind == "figure":
        g = gen_figure(args.name, args.epsilon)
    elif args.kind == "3sat":
        with open(args.cnf, encoding="utf-8") as fh:
            f = parse_dimacs(fh.read())
        g = gen_3sat(f, args.lam)
    else:
        g = gen_random(
            args.vertices, args.actions, args.players, (args.reward_min, args.reward_max), args.seed, args.lam
        )
    text = render_game(g)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_export_smt(args) -> int:
    g = load_game(args.game)
    text = export_constraints(g, args.memory, args.mode, args.threshold)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="structured output, rationals as 'p/q' strings")
    common.add_argument("--approx", action="store_true", help="append decimal renderings (display only)")

    parser = argparse.ArgumentParser(prog="dsleader", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("punish", parents=[common], help="punishment values of every player")
    p.add_argument("game")
    p.add_argument("--policies", action="store_true")
    p.set_defaults(func=cmd_punish)

    p = sub.add_parser("verify", parents=[common], help="check a profile")
    p.add_argument("game")
    p.add_argument("profile")
    p.add_argument("--mode", choices=MODES, default="leader")
    p.add_argument("--classic", action="store_true", help="classic Nash check without retaliation")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("solve", parents=[common], help="optimal bounded-memory profile")
    p.add_argument("game")
    p.add_argument("--memory", "-K", type=int, required=True)
    p.add_argument("--mode", choices=MODES, default="leader")
    p.add_argument("--threshold", type=_rational)
    p.add_argument("--oracle", action="store_true", help="cross-check with exhaustive enumeration")
    p.add_argument("--threads", type=int, default=None, help="worker processes (default $DSLEADER_THREADS or 1)")
    p.add_argument("--witness-out", help="write the witness profile to this file")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("generate", help="write a game file")
    gsub = p.add_subparsers(dest="kind", required=True)
    q = gsub.add_parser("figure")
    q.add_argument("name", choices=FIGURES)
    q.add_argument("--epsilon", type=_rational, default=Fraction(1, 4))
    q.add_argument("--output", "-o")
    q = gsub.add_parser("3sat")
    q.add_argument("cnf")
    q.add_argument("--lambda", dest="lam", type=_rational, default=Fraction(1, 2))
    q.add_argument("--output", "-o")
    q = gsub.add_parser("random")
    q.add_argument("--vertices", type=int, required=True)
    q.add_argument("--actions", type=int, required=True)
    q.add_argument("--players", type=int, required=True)
    q.add_argument("--seed", type=int, required=True)
    q.add_argument("--reward-min", type=int, default=-3)
    q.add_argument("--reward-max", type=int, default=3)
    q.add_argument("--lambda", dest="lam", type=_rational, default=None)
    q.add_argument("--output", "-o")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("export-smt", help="SMT-LIB 2 encoding of the threshold problem")
    p.add_argument("game")
    p.add_argument("--memory", "-K", type=int, required=True)
    p.add_argument("--mode", choices=MODES, default="leader")
    p.add_argument("--threshold", type=_rational, required=True)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_export_smt)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (GameFormatError, ProfileError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
