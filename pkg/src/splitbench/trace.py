"""Per-iteration trace records, run bookkeeping, and trace CSV I/O."""

import csv
import math
import time
from dataclasses import dataclass, fields

import numpy as np


@dataclass
class TraceRecord:
    run_id: str
    algorithm: str
    outer_iter: int          # completed outer steps, 1-based
    data_passes: float
    grad_evals: int
    wall_ms: float
    objective_at_avg: float  # theta1 + theta2 at the averaged second block
    objective_at_last: float  # same, at the current second block
    objective_pair_avg: float  # theta1(x1_avg) + theta2(x2_avg)
    residual_norm: float     # ||A x1 + B x2 - b|| at the current iterates
    residual_avg_norm: float  # same, at the running averages
    criterion: float | None  # filled by the harness once a reference exists
    C_k: float
    M_k: int
    eta_k: float


TRACE_FIELDS = [f.name for f in fields(TraceRecord)]
_INT_FIELDS = {"outer_iter", "grad_evals", "M_k"}
_STR_FIELDS = {"run_id", "algorithm"}


def _fmt(name, value):
    if name in _STR_FIELDS:
        return str(value)
    if name == "criterion" and value is None:
        return ""
    if name in _INT_FIELDS:
        return str(int(value))
    return repr(float(value))


def write_trace_csv(path, records, zero_wall=False):
    """One row per record, header exactly the TraceRecord field names.

    zero_wall suppresses wall-clock times so that serial benchmark runs
    are byte-identical across invocations.
    """
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_FIELDS)
        for rec in records:
            row = []
            for name in TRACE_FIELDS:
                value = getattr(rec, name)
                if zero_wall and name == "wall_ms":
                    value = 0.0
                row.append(_fmt(name, value))
            w.writerow(row)


def read_trace_csv(path):
    records = []
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if header != TRACE_FIELDS:
            raise ValueError(f"{path}: unexpected trace header {header}")
        for row in r:
            kwargs = {}
            for name, cell in zip(TRACE_FIELDS, row):
                if name in _STR_FIELDS:
                    kwargs[name] = cell
                elif name == "criterion":
                    kwargs[name] = None if cell == "" else float(cell)
                elif name in _INT_FIELDS:
                    kwargs[name] = int(cell)
                else:
                    kwargs[name] = float(cell)
            records.append(TraceRecord(**kwargs))
    return records


@dataclass
class SolveResult:
    """Everything one solver run produces."""

    x1_avg: np.ndarray
    x2_avg: np.ndarray
    lam_avg: np.ndarray
    x1_last: np.ndarray
    x2_last: np.ndarray
    lam_last: np.ndarray
    trace: list
    converged: bool
    outer_iters: int
    data_passes: float
    grad_evals: int
    info: dict

    @property
    def z_avg(self):
        """Ergodic-average output of the first block."""
        return self.x1_avg

    @property
    def z_last(self):
        return self.x1_last


class RunLog:
    """Counters, ergodic sums, and decimated trace emission for one run.

    The ergodic averages are the arithmetic mean of all iterates produced
    so far, excluding the initial point.
    """

    def __init__(self, problem, algorithm, run_id="run0", trace_every=1):
        self.problem = problem
        self.algorithm = algorithm
        self.run_id = run_id
        self.trace_every = max(1, int(trace_every))
        self.records = []
        self.data_passes = 0.0
        self.grad_evals = 0
        self.count = 0
        self.sum_x1 = np.zeros(problem.dim1)
        self.sum_x2 = np.zeros(problem.dim2)
        self.sum_lam = np.zeros(problem.m)
        self._t0 = time.perf_counter()

    def charge(self, passes, evals):
        self.data_passes += passes
        self.grad_evals += int(evals)

    def push_iterate(self, x1, x2, lam):
        self.count += 1
        self.sum_x1 += x1
        self.sum_x2 += x2
        self.sum_lam += lam

    def averages(self):
        k = self.count
        return self.sum_x1 / k, self.sum_x2 / k, self.sum_lam / k

    def record(self, x1, x2, C_k=math.nan, M_k=0, eta_k=math.nan, force=False):
        if not force and (self.count % self.trace_every) != 0:
            return
        if self.records and self.records[-1].outer_iter == self.count:
            return
        x1a, x2a, _ = self.averages()
        prob = self.problem
        rec = TraceRecord(
            run_id=self.run_id,
            algorithm=self.algorithm,
            outer_iter=self.count,
            data_passes=self.data_passes,
            grad_evals=self.grad_evals,
            wall_ms=(time.perf_counter() - self._t0) * 1e3,
            objective_at_avg=prob.objective(x2a),
            objective_at_last=prob.objective(x2),
            objective_pair_avg=prob.theta_pair(x1a, x2a),
            residual_norm=float(np.linalg.norm(prob.residual(x1, x2))),
            residual_avg_norm=float(np.linalg.norm(prob.residual(x1a, x2a))),
            criterion=None,
            C_k=C_k,
            M_k=int(M_k),
            eta_k=eta_k,
        )
        self.records.append(rec)

    def result(self, x1, x2, lam, converged, info=None):
        x1a, x2a, lama = self.averages() if self.count else (x1, x2, lam)
        return SolveResult(
            x1_avg=x1a,
            x2_avg=x2a,
            lam_avg=lama,
            x1_last=x1,
            x2_last=x2,
            lam_last=lam,
            trace=self.records,
            converged=converged,
            outer_iters=self.count,
            data_passes=self.data_passes,
            grad_evals=self.grad_evals,
            info=info or {},
        )
