"""Command-line benchmark harness.

Subcommands: ``solve`` (single run), ``converge`` (sweeps over control or
collocation counts), ``stability`` (the non-uniform-knot experiment) and
``cost-model`` (closed-form flop counts). Flags mirror the experiment
configuration fields; ``--config`` loads a JSON file with the same keys
and explicit flags override it.

Exit codes: 0 success, 2 configuration error, 3 assembly error, 4 solver
error, 1 any other library failure.
"""

from __future__ import annotations

import argparse
import sys

from .bench import (
    cost_model_rows,
    run_convergence,
    run_solve,
    run_stability,
    write_csv,
    write_json,
)
from .config import EXAMPLE_IDS, METHODS, SCHEMES, ExperimentConfig
from .errors import (
    AssemblyError,
    ConfigError,
    RankDeficientError,
    SingularSystemError,
    SplineColError,
)

EXIT_CONFIG = 2
EXIT_ASSEMBLY = 3
EXIT_SOLVER = 4
EXIT_OTHER = 1


def _counts(text):
    return tuple(int(tok) for tok in text.split(",") if tok)


def _add_common(parser, include_method=True):
    parser.add_argument("--config", help="JSON configuration file; flags override it")
    parser.add_argument("--example", choices=EXAMPLE_IDS)
    if include_method:
        parser.add_argument("--method", choices=METHODS)
    parser.add_argument("--scheme", choices=SCHEMES)
    parser.add_argument(
        "-n", "--n-per-dir", type=_counts, dest="n",
        help="control points per direction, e.g. 10 or 15,15",
    )
    parser.add_argument(
        "-m", "--m-per-dir", type=_counts, dest="m",
        help="collocation points per direction",
    )
    parser.add_argument("--quad-order", type=int, dest="quad_order")
    parser.add_argument(
        "--boundary-weight", dest="boundary_weight",
        help="scalar weight for boundary rows, or 'auto' (default)",
    )
    parser.add_argument("--seed", type=int)
    parser.add_argument(
        "-o", "--output",
        help="path stem for <stem>.csv and <stem>.json result files",
    )


def _merge_config(args, **extra) -> ExperimentConfig:
    data = {}
    if args.config:
        data.update(ExperimentConfig.from_file(args.config).to_dict())
    for key in ("example", "method", "scheme", "n", "m", "quad_order",
                "boundary_weight", "seed", "output"):
        value = getattr(args, key, None)
        if value is not None:
            data[key] = list(value) if isinstance(value, tuple) else value
    data.update(extra)
    return ExperimentConfig.from_dict(data)


def _print_rows(rows):
    for row in rows:
        if row.get("error"):
            print(
                f"{row['example']} {row['method']:<13} n={row['n_per_dir']} "
                f"m={row['m_per_dir']} FAILED: {row['error']}"
            )
            continue
        e_dt = "" if row["e_DT"] is None else f" e_DT={row['e_DT']:.4g}"
        flag = "" if row["stable"] else "  [unstable]"
        print(
            f"{row['example']} {row['method']:<13} {row['scheme']:<8} "
            f"n={row['n_per_dir']:<9} m={row['m_per_dir']:<9} "
            f"{row['quantity']}: e_T={row['e_T']:.4g}{e_dt} "
            f"max|e|={row['max_abs']:.4g}{flag}"
        )


def cmd_solve(args) -> int:
    config = _merge_config(args)
    rows, report, solve_report = run_solve(config)
    _print_rows(rows)
    print(
        f"solver {solve_report.method}: residual={solve_report.residual_norm:.3e} "
        f"flops={solve_report.flop_estimate:.3g} "
        f"cond~{solve_report.condition_estimate:.2e}"
    )
    if config.output:
        print(f"wrote {config.output}.csv and {config.output}.json")
    return 0


def cmd_converge(args) -> int:
    extra = {}
    if args.n_seq:
        extra["n_seq"] = [list(v) for v in args.n_seq]
    if args.m_seq:
        extra["m_seq"] = [list(v) for v in args.m_seq]
    methods = args.methods or ["igac"]
    rows = []
    configs = []
    for method in methods:
        # Each method sweeps the same sequences; the combined rows land in
        # one output file in method-major, sequence-minor order.
        config = _merge_config(args, method=method, output=None, **extra)
        configs.append(config)
        rows.extend(run_convergence(config))
    if args.output:
        write_csv(f"{args.output}.csv", rows)
        write_json(
            f"{args.output}.json",
            {"configs": [c.to_dict() for c in configs], "rows": rows},
        )
    _print_rows(rows)
    return 0


def cmd_stability(args) -> int:
    config = _merge_config(args, example="V", method="igal_fixed",
                           m=list(args.m) if args.m else [16])
    rows, summary = run_stability(config)
    _print_rows(rows)
    for name, info in summary.items():
        state = "stable" if info["stable"] else "UNSTABLE"
        print(f"{name:<22} e_T={info['e_T']:.4g}  {state}")
    return 0


def cmd_cost_model(args) -> int:
    rows = cost_model_rows(
        args.dimension, args.degree, args.n_scalar, args.m_scalar,
        kind=args.kind, bracketed=args.bracketed,
    )
    width = max(len(name) for name, _ in rows)
    for name, flops in rows:
        print(f"{name:<{width}}  {flops:,.0f} flops")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="splinecol",
        description="Spline collocation solvers and convergence benchmarks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run one solve and report its errors")
    _add_common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("converge", help="sweep control/collocation counts")
    _add_common(p, include_method=False)
    p.add_argument(
        "--method", dest="methods", action="append", choices=METHODS,
        help="repeatable; each method is swept over the same sequences",
    )
    p.add_argument(
        "--n-seq", type=_counts, action="append", default=[],
        help="repeatable control-count step, e.g. --n-seq 6 --n-seq 8",
    )
    p.add_argument(
        "--m-seq", type=_counts, action="append", default=[],
        help="repeatable collocation-count step (requires fixed -n)",
    )
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("stability", help="non-uniform-knot stability experiment")
    _add_common(p)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("cost-model", help="closed-form flop counts")
    p.add_argument("--dimension", type=int, choices=(1, 2, 3), required=True)
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("-n", dest="n_scalar", type=int, required=True,
                   help="control points per direction")
    p.add_argument("-m", dest="m_scalar", type=int, required=True,
                   help="collocation points per direction")
    p.add_argument("--kind", choices=("scalar", "vector"), default="scalar")
    p.add_argument("--bracketed", action="store_true",
                   help="use the alternate constants quoted from prior work")
    p.set_defaults(func=cmd_cost_model)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AssemblyError as exc:
        print(f"assembly error: {exc}", file=sys.stderr)
        return EXIT_ASSEMBLY
    except (SingularSystemError, RankDeficientError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except SplineColError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
