"""Command-line harness.

Subcommands: generate (synthetic datasets), solve (one solver on one
dataset), bench (replicated comparison from a plan file), fit-rate
(log-log slope of a trace column), plot (SVG decay plot).
"""

import argparse
import configparser
import sys

import numpy as np

from . import bench, datagen
from .problems import make_problem
from .trace import read_trace_csv, write_trace_csv


def _cmd_generate(args):
    if args.preset in datagen.DATASET_PRESETS:
        ds = datagen.generate_preset(args.preset, seed=args.seed)
    elif args.preset == "lasso":
        ds = datagen.gen_lasso(args.n, args.p, args.s, noise_sd=args.noise_sd,
                               seed=args.seed)
    elif args.preset == "group_lasso":
        ds = datagen.gen_group_lasso(args.n, args.groups, args.max_group,
                                     noise_sd=args.noise_sd, seed=args.seed)
    elif args.preset == "logistic":
        ds = datagen.gen_sparse_logistic(args.n, args.p, args.s,
                                         row_nnz=args.row_nnz,
                                         noise_sd=args.noise_sd, seed=args.seed)
    else:
        raise ValueError(
            f"unknown preset or kind {args.preset!r}; presets: "
            f"{sorted(k for k, v in datagen.DATASET_PRESETS.items() if 'gen' in v)}"
            " or one of lasso / group_lasso / logistic with explicit sizes"
        )
    datagen.save_libsvm(args.out, ds)
    print(f"wrote {ds.n} x {ds.p} dataset to {args.out}")
    return 0


def _load_config_section(path, algorithm):
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    with open(path) as fh:
        cp.read_file(fh)
    if algorithm not in cp:
        raise ValueError(f"{path}: no [{algorithm}] section")
    return dict(cp[algorithm])


def _cmd_solve(args):
    ds_seed = args.seed if args.seed is not None else 0
    dataset, spec = bench.load_dataset(args.dataset, seed=ds_seed,
                                       label_column=args.label_column)
    kind = args.kind or dataset.meta.get("kind") or spec.get("kind")
    zeta = args.zeta
    if zeta is None:
        zeta = spec.get("zeta") or dataset.meta.get("zeta")
    if zeta is None:
        zeta = datagen.regularization_zeta(dataset, kind)
    if not zeta > 0:
        raise ValueError(
            f"regularization level must be positive for solver runs, got {zeta}"
        )
    problem = make_problem(dataset, zeta, kind)

    mapping = _load_config_section(args.config, args.alg) if args.config else {}
    cfg = bench.build_config(args.alg, mapping)
    if args.seed is not None:
        cfg.seed = args.seed
    solve = bench.ALGORITHMS[args.alg][1]
    result = solve(problem, cfg, pass_budget=args.budget)
    if args.trace:
        write_trace_csv(args.trace, result.trace)
    tail = result.trace[-1] if result.trace else None
    status = "converged" if result.converged else "stopped"
    print(
        f"{args.alg} {status} after {result.outer_iters} outer iterations, "
        f"{result.data_passes:.2f} data passes"
    )
    if tail is not None:
        print(
            f"objective(avg)={tail.objective_at_avg:.6e} "
            f"residual={tail.residual_norm:.3e}"
        )
    return 0


def _cmd_bench(args):
    plan = bench.parse_plan(args.plan)
    summary = bench.run_benchmark(plan)
    failed = []
    for name, alg in summary["algorithms"].items():
        n_div = alg["diverged"]
        print(f"{name}: {alg['replicates']} replicates, {n_div} diverged")
        means = alg.get("final_means")
        if means:
            crit = means.get("criterion")
            crit_s = f"{max(crit, 0.0):.6e}" if crit is not None else "n/a"
            print(
                f"  final means: objective(avg)={means['objective_at_avg']:.6e} "
                f"criterion={crit_s} data_passes={means['data_passes']:.2f}"
            )
        if n_div == alg["replicates"]:
            failed.append(name)
    if failed:
        print(f"all replicates failed for: {', '.join(failed)}", file=sys.stderr)
        return 1
    print(f"outputs in {plan.out_dir}")
    return 0


def _cmd_fit_rate(args):
    try:
        table = bench.read_mean_csv(args.csv)
        axis = "outer_iter" if "outer_iter" in table else "data_passes"
        if args.column not in table:
            raise ValueError(f"{args.csv}: no column {args.column!r}")
        xs, ys = table[axis], table[args.column]
    except ValueError:
        records = read_trace_csv(args.csv)  # fall back to a run trace
        axis = "outer_iter"
        xs = [r.outer_iter for r in records]
        ys = [getattr(r, args.column) for r in records]
        ys = [np.nan if v is None else v for v in ys]
    slope = bench.fit_rate(xs, ys, args.k_from, args.k_to)
    print(f"slope {slope:.4f} over {axis} in [{args.k_from:g}, {args.k_to:g}]")
    return 0


def _cmd_plot(args):
    series = []
    for path in args.csvs:
        stem = path.rsplit("/", 1)[-1].rsplit(".", 1)[0]
        try:
            table = bench.read_mean_csv(path)
            axis = "data_passes" if "data_passes" in table else "outer_iter"
            ys = table[args.column]
            xs = table[axis]
        except (ValueError, KeyError):
            records = read_trace_csv(path)
            xs = np.array([r.data_passes for r in records])
            vals = [getattr(r, args.column) for r in records]
            ys = np.array([np.nan if v is None else v for v in vals])
        series.append((stem, xs, ys))
    layout = bench.emit_plot_svg(series, args.out, y_label=f"log10({args.column})")
    print(f"wrote {layout['path']} with {len(layout['series'])} series")
    return 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="splitbench",
        description="Splitting-method solvers and convergence benchmarks",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic dataset")
    g.add_argument("preset", help="preset name, or lasso/group_lasso/logistic")
    g.add_argument("--out", required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--n", type=int, default=200)
    g.add_argument("--p", type=int, default=100)
    g.add_argument("--s", type=int, default=10)
    g.add_argument("--groups", type=int, default=20)
    g.add_argument("--max-group", type=int, default=10)
    g.add_argument("--row-nnz", type=int, default=20)
    g.add_argument("--noise-sd", type=float, default=0.1)
    g.set_defaults(func=_cmd_generate)

    s = sub.add_parser("solve", help="run one solver on one dataset")
    s.add_argument("dataset", help="preset name or data file path")
    s.add_argument("--alg", required=True, choices=sorted(bench.ALGORITHMS))
    s.add_argument("--config", help="INI file with a [<alg>] section")
    s.add_argument("--trace", help="CSV path for the per-iteration trace")
    s.add_argument("--kind", choices=("lasso", "group_lasso", "logistic"))
    s.add_argument("--zeta", type=float)
    s.add_argument("--budget", type=float, help="data-pass budget")
    s.add_argument("--seed", type=int)
    s.add_argument("--label-column", default="label")
    s.set_defaults(func=_cmd_solve)

    b = sub.add_parser("bench", help="run a replicated comparison")
    b.add_argument("plan", help="INI plan file with a [bench] section")
    b.set_defaults(func=_cmd_bench)

    f = sub.add_parser("fit-rate", help="log-log slope of a mean-trace column")
    f.add_argument("csv")
    f.add_argument("--from", dest="k_from", type=float, required=True)
    f.add_argument("--to", dest="k_to", type=float, required=True)
    f.add_argument("--column", default="criterion")
    f.set_defaults(func=_cmd_fit_rate)

    p = sub.add_parser("plot", help="emit an SVG decay plot")
    p.add_argument("csvs", nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--column", default="criterion")
    p.set_defaults(func=_cmd_plot)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
