"""Command line interface: gen, sweep, fractality, verify."""

import argparse
import json
import sys

from . import experiments, fractal_graph, fractality
from .acceptance import run_checks
from .errors import ParameterError, SchemaError


def _add_common(p):
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--out", help="output path")
    p.add_argument("--threads", type=int, default=1, help="worker threads")
    p.add_argument("--seed", type=int, help="override the config seed list")
    p.add_argument("--json", action="store_true",
                   help="newline-delimited JSON records instead of CSV")


def build_parser():
    ap = argparse.ArgumentParser(prog="fracd2d",
                                 description="fractal D2D social network capacity experiments")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a social graph and export its edge list")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--gamma", type=float, default=2.5)
    g.add_argument("--epsilon", type=float, default=2.5)
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("--out", required=True)

    s = sub.add_parser("sweep", help="run the experiment sweep")
    _add_common(s)

    f = sub.add_parser("fractality", help="box-covering exponent report")
    f.add_argument("--graph", help="edge-list file (default: generate)")
    f.add_argument("--n", type=int, default=10000)
    f.add_argument("--gamma", type=float, default=2.5)
    f.add_argument("--epsilon", type=float, default=2.5)
    f.add_argument("--seed", type=int, default=1)
    f.add_argument("--lb", default="2,3,4,5", help="comma-separated box sizes")
    f.add_argument("--out", help="write the JSON report here (default stdout)")
    f.add_argument("--covering", help="also export the covering at the largest box size")

    v = sub.add_parser("verify", help="run the acceptance suite")
    v.add_argument("--only", help="comma-separated subset of check ids (e.g. A2,A7)")
    return ap


def _cmd_gen(args):
    params = fractal_graph.FractalParams(n=args.n, gamma=args.gamma,
                                         epsilon=args.epsilon, seed=args.seed)
    _, graph = fractal_graph.generate(params)
    fractal_graph.write_edge_list(graph, args.out)
    print(f"wrote {graph.edge_count} edges to {args.out} "
          f"(total shortfall {graph.total_shortfall})")
    return 0


def _cmd_sweep(args):
    cfg = experiments.load_config(args.config) if args.config else experiments.default_config()
    if args.seed is not None:
        cfg.seeds = [args.seed]
    records = experiments.run_sweep(cfg, out_path=args.out, threads=args.threads,
                                    json_mode=args.json, echo=print)
    print(f"{len(records)} records -> {args.out or cfg.out}")
    return 0


def _cmd_fractality(args):
    if args.graph:
        graph = fractal_graph.read_edge_list(args.graph)
    else:
        params = fractal_graph.FractalParams(n=args.n, gamma=args.gamma,
                                             epsilon=args.epsilon, seed=args.seed)
        _, graph = fractal_graph.generate(params)
    l_bs = [int(x) for x in args.lb.split(",") if x.strip()]
    report = fractality.estimate_exponents(graph, l_bs)
    payload = {
        "d_b": report.d_b, "d_g": report.d_g, "d_e": report.d_e,
        "gamma_hat": report.gamma_hat, "epsilon_hat": report.epsilon_hat,
        "fit_r_squared": report.fit_r_squared,
        "l_b_values": report.l_b_values, "box_counts": report.box_counts,
        "n": report.n, "giant_size": report.giant_size,
        "n_components": report.n_components,
    }
    text = json.dumps(payload, indent=2, allow_nan=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        print(f"report -> {args.out}")
    else:
        print(text)
    if args.covering:
        cov = fractality.box_cover(graph, max(l_bs))
        fractality.write_covering(cov, args.covering)
        print(f"covering (l_b={max(l_bs)}) -> {args.covering}")
    return 0


def _cmd_verify(args):
    only = args.only.split(",") if args.only else None
    results, ok = run_checks(only=only)
    width = max(len(r.title) for r in results)
    print("\n" + "-" * (width + 22))
    for r in results:
        print(f"{r.check_id:<4} {r.title:<{width}} "
              f"{'PASS' if r.passed else 'FAIL':<5} {r.seconds:7.1f}s")
    print("-" * (width + 22))
    print("acceptance:", "PASS" if ok else "FAIL")
    return 0 if ok else 1


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "fractality":
            return _cmd_fractality(args)
        if args.command == "verify":
            return _cmd_verify(args)
    except (ParameterError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
