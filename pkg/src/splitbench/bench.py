"""Benchmark harness: replicated solver comparisons, reference-based
criterion traces, rate-slope fits, and plot emission.

Plan and config files are flat key=value text (INI): one [bench] section
for the plan, one section per algorithm whose keys mirror the config
dataclass fields.
"""

import configparser
import csv
import dataclasses
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import baselines, datagen, splitters
from .errors import DivergenceError
from .numkit import PsdMat
from .problems import make_problem
from .reference import reference_solution
from .trace import TRACE_FIELDS, read_trace_csv, write_trace_csv

ALGORITHMS = {
    "ss_prsm": (splitters.SolverConfig, splitters.ss_prsm_solve),
    "sspb_scprsm": (baselines.BaselineConfig, baselines.sspb_scprsm_solve),
    "s_admm": (baselines.BaselineConfig, baselines.s_admm_solve),
    "batch_admm": (baselines.BaselineConfig, baselines.batch_admm_solve),
    "sc_prsm": (baselines.BaselineConfig, baselines.sc_prsm_solve),
}

# Named parameterizations used in the reported experiments.
CONFIG_PRESETS = {
    "lasso": dict(beta=1.0, alpha=0.9, gamma=0.1, S="I", a=1.0, eps=1e-11),
    "lasso_s5": dict(beta=1.0, alpha=0.9, gamma=0.1, S="5I", a=1.0, eps=1e-11),
    "grouplasso": dict(beta=1.0, alpha=0.9, gamma=0.1, S="I", a=1.0, eps=1e-11),
    "sparse_logistic": dict(beta=1.0, alpha=0.5, gamma=0.3, S="3I", a=3.0,
                            eps=1e-8),
    "crime": dict(beta=5.0, alpha=0.8, gamma=0.3, S="2I", a=2.5, eps=1e-11),
    "e2006": dict(beta=0.8, alpha=0.9, gamma=0.1, S="I", a=1.8, eps=1e-11),
    "sido": dict(beta=1.0, alpha=0.5, gamma=0.3, S="I", a=1.0, eps=1e-8),
    "nslkdd": dict(beta=1.0, alpha=0.9, gamma=0.3, S="I", a=2.0, eps=1e-11),
}


_INT_KEYS = {"max_outer", "seed", "trace_every", "M_cap"}
_BOOL_KEYS = {"cache_factorization"}


def build_config(algorithm, mapping):
    """Typed config from a flat key=value mapping (strings allowed).

    A "preset" key expands to one of the named parameterizations in
    CONFIG_PRESETS before the explicit keys are applied.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(
            f"unknown algorithm {algorithm!r}; available: {sorted(ALGORITHMS)}"
        )
    cls = ALGORITHMS[algorithm][0]
    kwargs = {}
    valid = {f.name for f in dataclasses.fields(cls)}
    mapping = dict(mapping)
    preset = mapping.pop("preset", None)
    if preset is not None:
        if preset not in CONFIG_PRESETS:
            raise ValueError(
                f"unknown config preset {preset!r}; available: "
                f"{sorted(CONFIG_PRESETS)}"
            )
        merged = dict(CONFIG_PRESETS[preset])
        merged.update(mapping)
        mapping = merged
    for key, raw in mapping.items():
        if key not in valid:
            raise ValueError(f"unknown {algorithm} config key {key!r}")
        if key == "S":
            kwargs[key] = raw if isinstance(raw, PsdMat) else PsdMat.from_spec(raw)
        elif raw is None or raw == "" or (isinstance(raw, str)
                                          and raw.lower() == "none"):
            kwargs[key] = None
        elif key in _INT_KEYS:
            kwargs[key] = int(float(raw))
        elif key in _BOOL_KEYS:
            kwargs[key] = str(raw).lower() in ("1", "true", "yes", "on")
        else:
            kwargs[key] = float(raw)
    cfg = cls(**kwargs)
    if hasattr(cfg, "validate"):
        cfg.validate()
    else:
        cfg.validate_common()
        if algorithm == "sspb_scprsm":
            cfg.validate_gate()
        if algorithm == "sc_prsm" and not 0.0 < cfg.alpha < 1.0:
            raise ValueError(
                f"sc_prsm needs alpha in (0, 1), got {cfg.alpha}"
            )
    return cfg


@dataclass
class BenchPlan:
    dataset: str                   # preset name or file path
    algorithms: dict               # name -> raw key=value mapping
    kind: str | None = None
    zeta: float | None = None
    label_column: str = "label"
    replicates: int = 20
    seed: int = 0
    rho: float = 1.0
    budget_passes: float | None = None
    out_dir: str = "bench_out"
    parallel: bool = False

    def validate(self):
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if not self.algorithms:
            raise ValueError("plan lists no algorithms")
        for name, mapping in self.algorithms.items():
            build_config(name, mapping)  # gate check before any run
        return self


def parse_plan(path):
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str  # keep key case: S vs s matters
    with open(path) as fh:
        cp.read_file(fh)
    if "bench" not in cp:
        raise ValueError(f"{path}: plan needs a [bench] section")
    b = cp["bench"]
    algorithms = {
        sect: dict(cp[sect]) for sect in cp.sections() if sect != "bench"
    }
    plan = BenchPlan(
        dataset=b.get("dataset", ""),
        algorithms=algorithms,
        kind=b.get("kind") or None,
        zeta=b.getfloat("zeta") if b.get("zeta") else None,
        label_column=b.get("label_column", "label"),
        replicates=b.getint("replicates", 20),
        seed=b.getint("seed", 0),
        rho=b.getfloat("rho", 1.0),
        budget_passes=b.getfloat("budget_passes") if b.get("budget_passes") else None,
        out_dir=b.get("out_dir", "bench_out"),
        parallel=b.getboolean("parallel", False),
    )
    if not plan.dataset:
        raise ValueError(f"{path}: [bench] needs a dataset")
    return plan.validate()


def load_dataset(source, seed=0, label_column="label", n_features=None):
    """Resolve a preset name or a file path into a Dataset."""
    if source in datagen.DATASET_PRESETS:
        spec = datagen.DATASET_PRESETS[source]
        if "gen" in spec:
            return datagen.generate_preset(source, seed=seed), spec
        raise ValueError(
            f"preset {source!r} needs a data file; pass its path and set "
            f"kind={spec['kind']!r}, zeta={spec['zeta']}"
        )
    if not os.path.exists(source):
        raise ValueError(f"dataset {source!r} is neither a preset nor a file")
    if source.endswith(".csv"):
        return datagen.load_csv(source, label_column), {}
    return datagen.load_libsvm(source, n_features=n_features), {}


def resolve_problem(plan):
    dataset, spec = load_dataset(plan.dataset, seed=plan.seed,
                                 label_column=plan.label_column)
    kind = plan.kind or dataset.meta.get("kind") or spec.get("kind")
    zeta = plan.zeta
    if zeta is None:
        zeta = spec.get("zeta") or dataset.meta.get("zeta")
    if zeta is None:
        zeta = datagen.regularization_zeta(dataset, kind)
    if not zeta > 0:
        raise ValueError(
            f"regularization level must be positive for solver runs, got {zeta}"
        )
    return make_problem(dataset, zeta, kind)


def criterion(problem, record, f_star, rho=1.0):
    """Optimality measure at the ergodic averages for one trace point:

    theta1(x1_avg) + theta2(x2_avg) - f_star + rho * ||residual at averages||.

    Returns the raw value; clamp at zero only when reporting.
    """
    return record.objective_pair_avg - f_star + rho * record.residual_avg_norm


def attach_criterion(problem, records, f_star, rho=1.0):
    worst = 0.0
    for rec in records:
        val = criterion(problem, rec, f_star, rho)
        rec.criterion = val
        worst = min(worst, val)
    if worst < -1e-9:
        raise RuntimeError(
            f"criterion dropped to {worst:.3e} (< -1e-9); the reference "
            "solution looks wrong"
        )
    return records


def _run_one(args):
    (problem, algorithm, mapping, seed, budget, run_id) = args
    cfg = build_config(algorithm, mapping)
    cfg.seed = seed
    solve = ALGORITHMS[algorithm][1]
    return solve(problem, cfg, pass_budget=budget, run_id=run_id)


def run_benchmark(plan, problem=None, reference=None):
    """Execute every algorithm x replicate, write per-run and mean-trace
    CSVs plus a JSON summary, and return the summary dict.

    Replicate r uses seed = plan.seed + r. Serial mode (parallel=False)
    zeroes wall-clock columns so its outputs are byte-identical across
    invocations of the same build.
    """
    plan.validate()
    os.makedirs(plan.out_dir, exist_ok=True)
    if problem is None:
        problem = resolve_problem(plan)
    if reference is None:
        _, f_star = reference_solution(problem)
    else:
        _, f_star = reference
    serial = not plan.parallel

    jobs = []
    for algorithm, mapping in plan.algorithms.items():
        for r in range(plan.replicates):
            run_id = f"rep{r:02d}"
            jobs.append(
                (problem, algorithm, mapping, plan.seed + r, plan.budget_passes,
                 run_id)
            )
    if plan.parallel:
        with ProcessPoolExecutor() as pool:
            outcomes = list(pool.map(_run_one_safe, jobs))
    else:
        outcomes = [_run_one_safe(job) for job in jobs]

    summary = {"dataset": plan.dataset, "rho": plan.rho, "f_star": f_star,
               "algorithms": {}}
    idx = 0
    for algorithm, mapping in plan.algorithms.items():
        entries = []
        for r in range(plan.replicates):
            result, error = outcomes[idx]
            idx += 1
            path = os.path.join(plan.out_dir, f"{algorithm}_rep{r:02d}.csv")
            if error is not None:
                entries.append({"rep": r, "diverged": True, "error": str(error),
                                "path": None})
                continue
            attach_criterion(problem, result.trace, f_star, plan.rho)
            write_trace_csv(path, result.trace, zero_wall=serial)
            entries.append({"rep": r, "diverged": False, "path": path,
                            "converged": result.converged})
        ok_paths = [e["path"] for e in entries if not e["diverged"]]
        alg_summary = {
            "replicates": plan.replicates,
            "diverged": sum(e["diverged"] for e in entries),
            "runs": entries,
        }
        if ok_paths:
            finals = [read_trace_csv(p)[-1] for p in ok_paths]
            means = {}
            for name in TRACE_FIELDS:
                if name in ("run_id", "algorithm"):
                    continue
                vals = [getattr(rec, name) for rec in finals]
                vals = [v for v in vals if v is not None]
                means[name] = float(np.mean(vals)) if vals else None
            alg_summary["final_means"] = means
            by_iter = mean_trace_by_iter([read_trace_csv(p) for p in ok_paths])
            by_pass = mean_trace_by_passes([read_trace_csv(p) for p in ok_paths])
            itpath = os.path.join(plan.out_dir, f"{algorithm}_mean_by_iter.csv")
            pppath = os.path.join(plan.out_dir, f"{algorithm}_mean_by_passes.csv")
            write_mean_csv(itpath, "outer_iter", by_iter)
            write_mean_csv(pppath, "data_passes", by_pass)
            alg_summary["mean_by_iter"] = itpath
            alg_summary["mean_by_passes"] = pppath
        summary["algorithms"][algorithm] = alg_summary

    with open(os.path.join(plan.out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    return summary


def _run_one_safe(args):
    try:
        return _run_one(args), None
    except DivergenceError as err:
        return None, err


_MEAN_COLUMNS = (
    "objective_at_avg",
    "objective_at_last",
    "objective_pair_avg",
    "residual_norm",
    "residual_avg_norm",
    "criterion",
)


def _locf(grid, xs, ys):
    """Last value carried forward onto grid; first value before the start."""
    out = np.empty(len(grid))
    j = -1
    for i, g in enumerate(grid):
        while j + 1 < len(xs) and xs[j + 1] <= g:
            j += 1
        out[i] = ys[max(j, 0)]
    return out


def _mean_trace(traces, axis_field):
    grid = sorted({getattr(rec, axis_field) for trace in traces for rec in trace})
    cols = {name: np.zeros(len(grid)) for name in _MEAN_COLUMNS}
    for trace in traces:
        xs = [getattr(rec, axis_field) for rec in trace]
        for name in _MEAN_COLUMNS:
            ys = [
                getattr(rec, name) if getattr(rec, name) is not None else math.nan
                for rec in trace
            ]
            cols[name] += _locf(grid, xs, ys)
    for name in _MEAN_COLUMNS:
        cols[name] /= len(traces)
    return grid, cols


def mean_trace_by_iter(traces):
    return _mean_trace(traces, "outer_iter")


def mean_trace_by_passes(traces):
    return _mean_trace(traces, "data_passes")


def write_mean_csv(path, axis_name, mean_trace):
    grid, cols = mean_trace
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([axis_name, *_MEAN_COLUMNS])
        for i, g in enumerate(grid):
            row = [repr(float(g))]
            for name in _MEAN_COLUMNS:
                v = cols[name][i]
                row.append("" if math.isnan(v) else repr(float(v)))
            w.writerow(row)


def read_mean_csv(path):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = {name: [] for name in header}
        for cells in r:
            for name, cell in zip(header, cells):
                rows[name].append(math.nan if cell == "" else float(cell))
    return {name: np.array(vals) for name, vals in rows.items()}


def fit_rate(k_values, crit_values, k_from, k_to):
    """Least-squares slope of log(criterion) against log(K) on [k_from, k_to].

    Points with nonpositive criterion are dropped; fewer than ten usable
    points is an error.
    """
    ks = np.asarray(k_values, dtype=float)
    cs = np.asarray(crit_values, dtype=float)
    mask = (ks >= k_from) & (ks <= k_to) & (cs > 0.0) & np.isfinite(cs)
    if mask.sum() < 10:
        raise ValueError(
            f"need >= 10 positive trace points in [{k_from}, {k_to}], "
            f"got {int(mask.sum())}"
        )
    slope, _ = np.polyfit(np.log(ks[mask]), np.log(cs[mask]), 1)
    return float(slope)


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def emit_plot_svg(series, path, x_label="data_passes",
                  y_label="log10(criterion)"):
    """Write a log-decay plot as a standalone SVG.

    series: list of (name, xs, ys) with ys on the raw scale; nonpositive
    ys are dropped before the log transform. Axis ranges cover the data
    with a 5 percent margin on each side. Returns the layout dict.
    """
    cleaned = []
    for name, xs, ys in series:
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        keep = (ys > 0.0) & np.isfinite(ys) & np.isfinite(xs)
        if keep.any():
            cleaned.append((name, xs[keep], np.log10(ys[keep])))
    if not cleaned:
        raise ValueError("no plottable points in any series")

    all_x = np.concatenate([xs for _, xs, _ in cleaned])
    all_y = np.concatenate([ys for _, _, ys in cleaned])
    xmin, xmax = float(all_x.min()), float(all_x.max())
    ymin, ymax = float(all_y.min()), float(all_y.max())
    xpad = 0.05 * (xmax - xmin or 1.0)
    ypad = 0.05 * (ymax - ymin or 1.0)
    x_range = (xmin - xpad, xmax + xpad)
    y_range = (ymin - ypad, ymax + ypad)

    W, H, ML, MR, MT, MB = 800, 560, 70, 20, 20, 50

    def sx(v):
        return ML + (v - x_range[0]) / (x_range[1] - x_range[0]) * (W - ML - MR)

    def sy(v):
        return H - MB - (v - y_range[0]) / (y_range[1] - y_range[0]) * (H - MT - MB)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<line x1="{ML}" y1="{H-MB}" x2="{W-MR}" y2="{H-MB}" stroke="black"/>',
        f'<line x1="{ML}" y1="{MT}" x2="{ML}" y2="{H-MB}" stroke="black"/>',
        f'<text x="{(W-MR+ML)/2}" y="{H-12}" text-anchor="middle" '
        f'font-size="14">{x_label}</text>',
        f'<text x="16" y="{(H-MB+MT)/2}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 16 {(H-MB+MT)/2})">{y_label}</text>',
        f'<text x="{ML}" y="{H-MB+16}" font-size="11">{x_range[0]:.4g}</text>',
        f'<text x="{W-MR}" y="{H-MB+16}" text-anchor="end" font-size="11">'
        f'{x_range[1]:.4g}</text>',
        f'<text x="{ML-4}" y="{H-MB}" text-anchor="end" font-size="11">'
        f'{y_range[0]:.4g}</text>',
        f'<text x="{ML-4}" y="{MT+10}" text-anchor="end" font-size="11">'
        f'{y_range[1]:.4g}</text>',
    ]
    for i, (name, xs, ys) in enumerate(cleaned):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
            f'points="{pts}"/>'
        )
        parts.append(
            f'<text x="{W-MR-6}" y="{MT + 16 * (i + 1)}" text-anchor="end" '
            f'font-size="12" fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
    return {"path": path, "x_range": x_range, "y_range": y_range,
            "series": [name for name, _, _ in cleaned]}
