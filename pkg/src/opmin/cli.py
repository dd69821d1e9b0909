"""Command-line front end.

Subcommands: simplify, search, sweep, bruteforce, generate, analyze.
Exit codes: 0 success, 1 usage error, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import benchgen
from .cse import dag_listing, simplify
from .expr import ParseError, naive_op_count, parse, to_string
from .horner import (
    Direction,
    Scheme,
    apply_scheme,
    occurrence_order,
    scheme_from_string,
    scheme_to_string,
    tree_op_count,
)
from .mcts import (
    Criterion,
    Schedule,
    SearchParams,
    brute_force_search,
    repeat_search,
    result_to_json_dict,
)
from .sweep import (
    DEFAULT_EPSILON,
    SweepConfig,
    analyze_rows,
    read_csv,
    run_sweep,
    write_csv,
)


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def _load_expression(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return parse(fh.read())


def _add_search_flags(p):
    p.add_argument("--cp", type=float, default=1.0, help="exploration constant / initial temperature")
    p.add_argument("--n-updates", type=int, default=1000, help="tree updates per run")
    p.add_argument("--criterion", choices=["uct", "sa-uct"], default="sa-uct")
    p.add_argument("--schedule", default="linear", help="linear, const, or exp:<halflife>")
    p.add_argument("--direction", choices=["forward", "backward"], default="forward")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="opmin", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simplify", help="apply a scheme and report operation counts")
    p.add_argument("exprfile")
    p.add_argument("--scheme", default="occurrence", help='"x,y" order, or "occurrence"')
    p.add_argument("--direction", choices=["forward", "backward"], default="forward")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_simplify)

    p = sub.add_parser("search", help="MCTS search for a low-operation scheme")
    p.add_argument("exprfile")
    _add_search_flags(p)
    p.add_argument("--repeats", type=int, default=1, help="independent runs, best kept")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("sweep", help="many runs over log-uniform cp values; CSV out")
    p.add_argument("exprfile")
    p.add_argument("--cp-min", type=float, default=0.01)
    p.add_argument("--cp-max", type=float, default=10.0)
    p.add_argument("--samples", type=int, default=4000)
    p.add_argument("--n-updates", type=int, default=1000)
    p.add_argument("--criterion", choices=["uct", "sa-uct"], default="sa-uct")
    p.add_argument("--schedule", default="linear")
    p.add_argument("--direction", choices=["forward", "backward"], default="forward")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", default="-", help="output path (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bruteforce", help="exhaustive minimum over all full schemes")
    p.add_argument("exprfile")
    p.add_argument("--direction", choices=["forward", "backward"], default="forward")
    p.add_argument("--max-vars", type=int, default=8)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_bruteforce)

    p = sub.add_parser("generate", help="write a benchmark expression file")
    gsub = p.add_subparsers(dest="generator", required=True)
    g = gsub.add_parser("resultant", help="res(m,n) Sylvester determinant")
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--out", default="-")
    g.set_defaults(func=cmd_generate_resultant)
    g = gsub.add_parser("random", help="seeded random sparse polynomial")
    g.add_argument("--vars", type=int, required=True)
    g.add_argument("--terms", type=int, required=True)
    g.add_argument("--max-exponent", type=int, default=4)
    g.add_argument("--coeff-range", type=int, default=9)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", default="-")
    g.set_defaults(func=cmd_generate_random)
    g = gsub.add_parser("preset", help="pinned named benchmark")
    g.add_argument("--name", required=True, choices=sorted(benchgen.PRESETS))
    g.add_argument("--out", default="-")
    g.set_defaults(func=cmd_generate_preset)

    p = sub.add_parser("analyze", help="region-of-interest report for a sweep CSV")
    p.add_argument("csvfile")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_analyze)

    return parser


def cmd_simplify(args) -> int:
    e = _load_expression(args.exprfile)
    direction = Direction(args.direction)
    if args.scheme == "occurrence":
        scheme = Scheme(occurrence_order(e).order, direction)
    else:
        scheme = scheme_from_string(args.scheme, e.atoms)
        if ";" not in args.scheme:
            scheme = Scheme(scheme.order, direction)
    naive = naive_op_count(e)
    horner_count = tree_op_count(apply_scheme(e, scheme))
    result = simplify(e, scheme)
    listing = dag_listing(result.dag, e.atoms)
    if args.format == "json":
        print(
            json.dumps(
                {
                    "naive": {"mul": naive.mul, "add": naive.add, "total": naive.total},
                    "horner": {
                        "mul": horner_count.mul,
                        "add": horner_count.add,
                        "total": horner_count.total,
                    },
                    "cse": {
                        "mul": result.ops.mul,
                        "add": result.ops.add,
                        "total": result.ops.total,
                    },
                    "scheme": scheme_to_string(scheme, e.atoms),
                    "dag": listing.split("\n"),
                },
                indent=2,
            )
        )
    else:
        print(f"naive:  {naive}")
        print(f"horner: {horner_count}")
        print(f"cse:    {result.ops}")
        print(f"scheme: {scheme_to_string(scheme, e.atoms)}")
        print("dag:")
        print(listing)
    return 0


def cmd_search(args) -> int:
    e = _load_expression(args.exprfile)
    params = SearchParams(
        cp=args.cp,
        n_updates=args.n_updates,
        repeats=args.repeats,
        criterion=Criterion(args.criterion),
        schedule=Schedule.from_string(args.schedule),
        direction=Direction(args.direction),
        seed=args.seed,
    )
    result = repeat_search(e, params)
    print(json.dumps(result_to_json_dict(result, params, e.atoms), indent=2))
    return 0


def cmd_sweep(args) -> int:
    e = _load_expression(args.exprfile)
    config = SweepConfig(
        cp_min=args.cp_min,
        cp_max=args.cp_max,
        samples=args.samples,
        n_updates=args.n_updates,
        criterion=Criterion(args.criterion),
        direction=Direction(args.direction),
        schedule=Schedule.from_string(args.schedule),
        base_seed=args.seed,
    )
    rows = run_sweep(e, config, jobs=args.jobs)
    out = sys.stdout if args.out == "-" else open(args.out, "w", encoding="utf-8", newline="")
    try:
        if args.format == "json":
            json.dump([row.__dict__ for row in rows], out, indent=2)
            out.write("\n")
        else:
            write_csv(rows, out)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_bruteforce(args) -> int:
    e = _load_expression(args.exprfile)
    direction = Direction(args.direction)
    result = brute_force_search(e, direction, max_vars=args.max_vars)
    if args.format == "json":
        print(
            json.dumps(
                {
                    "best_total": result.best_delta.total,
                    "best_mul": result.best_delta.mul,
                    "best_add": result.best_delta.add,
                    "scheme": scheme_to_string(result.best_scheme, e.atoms),
                    "schemes_evaluated": result.iterations_run,
                },
                indent=2,
            )
        )
    else:
        print(f"minimum: {result.best_delta}")
        print(f"scheme:  {scheme_to_string(result.best_scheme, e.atoms)}")
        print(f"schemes evaluated: {result.iterations_run}")
    return 0


def _write_expression(e, out_path: str) -> int:
    text = to_string(e) + "\n"
    if out_path == "-":
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0


def cmd_generate_resultant(args) -> int:
    return _write_expression(benchgen.resultant_expr(args.m, args.n), args.out)


def cmd_generate_random(args) -> int:
    params = benchgen.RandomExprParams(
        n_vars=args.vars,
        n_terms=args.terms,
        max_exponent=args.max_exponent,
        coeff_range=args.coeff_range,
        seed=args.seed,
    )
    return _write_expression(benchgen.random_expr(params), args.out)


def cmd_generate_preset(args) -> int:
    return _write_expression(benchgen.preset_expr(args.name), args.out)


def cmd_analyze(args) -> int:
    with open(args.csvfile, "r", encoding="utf-8", newline="") as fh:
        rows = read_csv(fh)
    report = analyze_rows(rows, epsilon=args.epsilon)
    if args.format == "csv":
        print("key,value")
        for k, v in report.items():
            print(f"{k},{v}")
    else:
        print(json.dumps(report, indent=2))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ParseError, ValueError, KeyError) as exc:
        print(f"opmin: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
