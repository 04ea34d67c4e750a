"""splitbench: stochastic and batch splitting solvers for linearly
constrained separable convex problems, with a rate benchmark harness."""

from .baselines import (
    BaselineConfig,
    batch_admm_solve,
    s_admm_solve,
    sc_prsm_solve,
    sspb_scprsm_solve,
)
from .bench import (
    ALGORITHMS,
    BenchPlan,
    criterion,
    emit_plot_svg,
    fit_rate,
    run_benchmark,
)
from .datagen import (
    Dataset,
    gen_group_lasso,
    gen_lasso,
    gen_sparse_logistic,
    load_csv,
    load_libsvm,
    regularization_zeta,
    save_libsvm,
)
from .errors import (
    DivergenceError,
    NonconvergenceError,
    ParseError,
    UnsupportedModelError,
)
from .numkit import (
    LinearMap,
    PsdMat,
    group_soft_threshold,
    soft_threshold,
    spectral_norm_estimate,
    weighted_sq_norm,
)
from .problems import Regularizer, SeparableProblem, make_problem
from .reference import lasso_zeta_max, reference_solution
from .splitters import (
    SolverConfig,
    gamma_max,
    inner_schedule,
    schedule_constants,
    ss_prsm_solve,
    variance_reduced_gradient,
)
from .trace import SolveResult, TraceRecord, read_trace_csv, write_trace_csv

__version__ = "0.1.0"
