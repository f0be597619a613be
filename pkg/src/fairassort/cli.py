"""Command line: fairassort {gen, ingest, solve, oracle, sweep, report}.

Exit status 0 on success, 2 on input errors (including bad flags),
3 on numerical or convergence failures.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import io
from .errors import InputError, NumericalError
from .harness import (
    RatingsSpec,
    SweepResult,
    SyntheticSpec,
    benchmark_spec,
    delta_sweep,
    fmt,
    gen_synthetic,
    gen_two_group,
    ingest_ratings,
    read_sweep,
    sweep_from_dict,
    sweep_to_dict,
    synthetic_ratings,
    write_sweep,
)
from .oracles import oracle_dispatch
from .solver import EllipsoidConfig, SolverConfig, solve

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


def _floats(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from None


def _emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _solver_args(p):
    g = p.add_argument_group("solver")
    g.add_argument("--method", default="colgen", choices=("colgen", "ellipsoid"))
    g.add_argument("--oracle", default="auto",
                   help="auto, exact, half, uniform-half, ptas[:eps], fptas[:eps], brute")
    g.add_argument("--feas-tol", type=float, default=1e-6)
    g.add_argument("--red-cost-tol", type=float, default=1e-7)
    g.add_argument("--max-iter", type=int, default=None, help="column generation cap (default 10 n^2)")
    g.add_argument("--t-max", type=int, default=10_000, help="ellipsoid iterations")
    g.add_argument("--q-max", type=int, default=None, help="reported in the ellipsoid iteration bound")


def _config(args):
    return SolverConfig(method=args.method, oracle=args.oracle, feas_tol=args.feas_tol,
                        red_cost_tol=args.red_cost_tol, max_iter=args.max_iter,
                        ellipsoid=EllipsoidConfig(t_max=args.t_max, q_max=args.q_max),
                        verify=getattr(args, "verify", False))


def _pick(insts, index):
    if not 0 <= index < len(insts):
        raise InputError(f"--index {index} out of range for {len(insts)} instance(s)")
    return insts[index]


# -- subcommands --------------------------------------------------------------

def cmd_gen(args):
    if args.preset in ("appendixF", "benchmark"):
        spec = benchmark_spec(args.beta, args.instances, args.seed)
        spec.delta = args.delta
        insts = gen_synthetic(spec)
    elif args.preset == "synthetic":
        spec = SyntheticSpec(n=args.n or 10, K=args.K or 5, beta=args.beta, revenue_range=tuple(args.revenue_range),
                             theta_range=tuple(args.theta_range), seed=args.seed,
                             instance_count=args.instances, delta=args.delta)
        insts = gen_synthetic(spec)
    else:
        rng = np.random.default_rng(args.seed)
        seeds = rng.integers(0, 2**63 - 1, size=args.instances)
        insts = [gen_two_group(args.preset, args.n, args.K, int(s), args.delta, args.beta, args.m) for s in seeds]
    text = io.save_instance(insts[0]) if len(insts) == 1 else io.save_instances(insts)
    _emit(text, args.out)


def cmd_ingest(args):
    spec = RatingsSpec(min_raters=args.min_raters, min_avg_rating=args.min_avg, top_n=args.top_n,
                       scale=args.scale, K=args.K, delimiter=args.delimiter or None, genre=args.genre)
    if args.standin is not None:
        lines = synthetic_ratings(seed=args.standin)
        if args.write_ratings:
            with open(args.write_ratings, "w", encoding="utf-8") as fh:
                fh.writelines(lines)
        src = lines
        spec.delimiter = "\t"
    elif args.ratings:
        src = args.ratings
    else:
        raise InputError("give --ratings FILE or --standin SEED")
    inst = ingest_ratings(src, spec, args.metadata, args.delta)
    _emit(io.save_instance(inst), args.out)


def cmd_solve(args):
    inst = _pick(io.load_instances(args.instance), args.index)
    if args.delta is not None:
        inst = inst.with_delta(args.delta)
    rep = solve(inst, _config(args))
    _emit(io.dump_json(io.report_to_dict(inst, rep, args.timing)), args.out)


def cmd_oracle(args):
    inst = _pick(io.load_instances(args.instance), args.index)
    z = np.zeros((inst.n, inst.n)) if args.z == "zero" else io.load_dual(args.z, inst.n)
    res = oracle_dispatch(inst, z, args.method)
    doc = {"method": res.method, "items": [inst.ids[i] for i in res.items], "value": float(res.value),
           "stats": {k: io._plain(v) for k, v in sorted((res.stats or {}).items())}}
    _emit(io.dump_json(doc), args.out)


def cmd_sweep(args):
    if args.instance:
        insts = io.load_instances(args.instance)
    elif args.preset in ("appendixF", "benchmark"):
        insts = gen_synthetic(benchmark_spec(args.beta, args.instances, args.seed))
    else:
        raise InputError("give --instance FILE or --preset appendixF")
    result = delta_sweep(insts, args.deltas, _config(args))
    _emit(write_sweep(result, None, args.delimiter, args.timing), args.out)
    if args.json:
        io.dump_json(sweep_to_dict(result, args.timing), args.json)


def _table(header, rows):
    cells = [list(header)] + [[c if isinstance(c, str) else fmt(c) for c in r] for r in rows]
    widths = [max(len(row[k]) for row in cells) for k in range(len(header))]
    lines = ["  ".join(c.rjust(wd) for c, wd in zip(row, widths)) for row in cells]
    lines.insert(1, "  ".join("-" * wd for wd in widths))
    return "\n".join(lines) + "\n"


def cmd_report(args):
    path = args.input
    if path.endswith((".csv", ".tsv", ".txt")):
        rows = read_sweep(path, args.delimiter)
        _emit(_table(("delta", "objective", "unconstrained", "pof", "support", "time"), rows), args.out)
        return
    doc = io.load_json(path)
    if isinstance(doc, dict) and "cells" in doc:
        res: SweepResult = sweep_from_dict(doc)
        rows = []
        for a in res.aggregate():
            rows.append((a["delta"], f"{fmt(a['objective'])} ± {fmt(a['objective_sem'])}",
                         f"{fmt(100 * a['pof'])}% ± {fmt(100 * a['pof_sem'])}",
                         f"{fmt(a['support'])} ± {fmt(a['support_sem'])}", a["count"]))
        text = _table(("delta", "objective", "loss", "support", "count"), rows)
        vis = [[a["delta"]] + [float(v) for v in a["visibility"]] for a in res.aggregate()]
        nvis = len(vis[0]) - 1 if vis else 0
        text += "\nmean visibility per item\n" + _table(("delta",) + tuple(str(k + 1) for k in range(nvis)), vis)
        _emit(text, args.out)
    elif isinstance(doc, dict) and "solution" in doc:
        head = (f"method {doc.get('method')}  oracle {doc.get('oracle')}  objective {fmt(doc['objective'])}  "
                f"iterations {doc.get('iterations')}  oracle calls {doc.get('oracle_calls')}\n\n")
        rows = [(" ".join(rec["items"]), rec["p"]) for rec in doc["solution"]["support"]]
        _emit(head + _table(("assortment", "p"), rows), args.out)
    else:
        raise InputError(f"{path}: not a sweep or solve report document")


# -- parser -------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="fairassort", description="Fair assortment planning under MNL choice.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate synthetic instances")
    g.add_argument("--preset", default="appendixF", choices=("appendixF", "benchmark", "synthetic", "quadrant", "attractive"))
    g.add_argument("--n", type=int, default=None)
    g.add_argument("--K", type=int, default=None)
    g.add_argument("--beta", type=float, default=-1.0)
    g.add_argument("--m", type=int, default=1, help="attractive: number of highly attractive items")
    g.add_argument("--revenue-range", type=float, nargs=2, default=(0.0, 1.0))
    g.add_argument("--theta-range", type=float, nargs=2, default=(0.0, 0.5))
    g.add_argument("--instances", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--delta", type=float, default=0.0)
    g.add_argument("--out", default=None)
    g.set_defaults(func=cmd_gen)

    g = sub.add_parser("ingest", help="build an instance from a ratings file")
    g.add_argument("--ratings", default=None, help="user/item/rating rows")
    g.add_argument("--standin", type=int, default=None, metavar="SEED",
                   help="use a synthetic stand-in ratings set instead of a file")
    g.add_argument("--write-ratings", default=None, help="with --standin: also save the ratings rows")
    g.add_argument("--delimiter", default="\t", help="field separator ('' splits on whitespace)")
    g.add_argument("--min-raters", type=int, default=5)
    g.add_argument("--min-avg", type=float, default=3.0)
    g.add_argument("--top-n", type=int, default=20)
    g.add_argument("--scale", type=float, default=1.0 / 20)
    g.add_argument("--K", type=int, default=5)
    g.add_argument("--genre", default=None)
    g.add_argument("--metadata", default=None, help="item file used by --genre")
    g.add_argument("--delta", type=float, default=0.0)
    g.add_argument("--out", default=None)
    g.set_defaults(func=cmd_ingest)

    g = sub.add_parser("solve", help="solve one instance")
    g.add_argument("--instance", required=True)
    g.add_argument("--index", type=int, default=0, help="position within an instance bundle")
    g.add_argument("--delta", type=float, default=None, help="override the file's delta")
    g.add_argument("--verify", action="store_true", help="compare against enumeration when small")
    g.add_argument("--timing", action="store_true", help="include wall time in the report")
    g.add_argument("--out", default=None)
    _solver_args(g)
    g.set_defaults(func=cmd_solve)

    g = sub.add_parser("oracle", help="one separation oracle call")
    g.add_argument("--instance", required=True)
    g.add_argument("--index", type=int, default=0)
    g.add_argument("--z", default="zero", help="'zero' or a JSON file holding the n x n matrix z")
    g.add_argument("--method", default="auto")
    g.add_argument("--out", default=None)
    g.set_defaults(func=cmd_oracle)

    g = sub.add_parser("sweep", help="solve over a grid of delta values")
    g.add_argument("--instance", default=None)
    g.add_argument("--preset", default="appendixF", choices=("appendixF", "benchmark"))
    g.add_argument("--beta", type=float, default=-1.0)
    g.add_argument("--instances", type=int, default=100)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--deltas", type=_floats, default=[0.0, 0.2, 0.4, 0.6, 0.8, 1.0])
    g.add_argument("--delimiter", default=",")
    g.add_argument("--timing", action="store_true", help="fill the time column")
    g.add_argument("--json", default=None, help="also write per-cell results here")
    g.add_argument("--out", default=None)
    _solver_args(g)
    g.set_defaults(func=cmd_sweep)

    g = sub.add_parser("report", help="render a sweep or solve report as a table")
    g.add_argument("--input", required=True)
    g.add_argument("--delimiter", default=",")
    g.add_argument("--out", default=None)
    g.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except InputError as exc:
        print(f"fairassort: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"fairassort: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
