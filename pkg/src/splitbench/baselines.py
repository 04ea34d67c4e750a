"""Competitor solvers sharing the problem and trace infrastructure.

Stochastic: single-sample linearized updates with a decaying step size
(one multiplier update, or the two-factor half/full pair). Batch: exact
quadratic first-block solves through a cached factorization (regression
losses only), with one or two multiplier updates.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from . import _fastloops
from .errors import DivergenceError, UnsupportedModelError
from .numkit import PsdMat
from .splitters import consensus_x2_step, gamma_max, reg_blocks
from .trace import RunLog


@dataclass
class BaselineConfig:
    """Shared parameter set for the four baselines.

    eta0 and eta_decay define the time-varying step eta_k = eta0/(k+1)^decay
    of the stochastic solvers (eta0 defaults to 1/nu at solve time).
    cache_factorization keeps the batch solvers' matrix factorization across
    iterations.
    """

    beta: float = 1.0
    alpha: float = 0.0
    gamma: float = 1.0
    S: PsdMat = field(default_factory=PsdMat.zero)
    a: float = 0.0
    eps: float = 1e-10
    max_outer: int = 100000
    seed: int = 0
    x2_init: float = 1.0
    trace_every: int = 1
    eta0: float | None = None
    eta_decay: float = 0.5
    cache_factorization: bool = True

    def validate_common(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.a < 0:
            raise ValueError(f"a must be nonnegative, got {self.a}")
        if self.max_outer < 1:
            raise ValueError("max_outer must be >= 1")
        if self.trace_every < 1:
            raise ValueError("trace_every must be >= 1")
        if self.eta0 is not None and not (
            math.isfinite(self.eta0) and self.eta0 > 0
        ):
            raise ValueError(
                f"eta0 must be finite and positive, got {self.eta0} "
                "(an unbounded step makes the linearized subproblem unbounded)"
            )
        return self

    def validate_gate(self):
        """Two-factor feasibility gate, same region as the main solver."""
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError(f"alpha must be in [0, 1), got {self.alpha}")
        gmax = gamma_max(self.alpha)
        if not 0.0 < self.gamma < gmax:
            raise ValueError(
                f"gamma={self.gamma} outside (0, {gmax:.4f}) for alpha={self.alpha}"
            )
        return self


def linearized_x1_step(x1, g, lam, x2, beta, inv_eta, s_coeff):
    """Exact minimizer of the linearized-plus-quadratic first-block
    subproblem for the consensus split:

    argmin <g, x> - <lam, x - x2> + beta/2 ||x - x2||^2
           + inv_eta/2 ||x - x1||^2 + 1/2 ||x - x1||_S^2
    """
    numer = x1 * inv_eta + s_coeff * x1 + lam + beta * x2 - g
    return numer / (beta + inv_eta + s_coeff)


def _require_consensus(problem, name):
    if not problem.is_consensus:
        raise UnsupportedModelError(
            f"{name} implements closed-form block updates for the consensus "
            "split only"
        )


def _check_finite(x1, x2, lam, beta, eta, log):
    if not (
        np.all(np.isfinite(x1))
        and np.all(np.isfinite(x2))
        and np.all(np.isfinite(lam))
    ):
        raise DivergenceError(
            f"iterate diverged (beta={beta}, eta={eta})",
            beta=beta,
            eta=eta,
            trace=log.records,
        )


def _stochastic_loop(problem, cfg, *, two_factor, algorithm, pass_budget,
                     run_id, xi_stream):
    """Shared driver for the two stochastic baselines.

    two_factor=False is the single-multiplier scheme; two_factor=True adds
    the half update (factor alpha), the a*I proximal second-block term, and
    the gamma full update. With alpha=0, gamma=1, S=0, a=0 the two paths
    perform identical floating-point operations.
    """
    cfg.validate_common()
    if two_factor:
        cfg.validate_gate()
    _require_consensus(problem, algorithm)
    n = problem.n
    beta = cfg.beta
    eta0 = cfg.eta0 if cfg.eta0 is not None else 1.0 / problem.smoothness_constant()
    s_coeff = cfg.S.as_coeff(problem.dim1) if two_factor else 0.0
    a = cfg.a if two_factor else 0.0
    rng = np.random.default_rng(cfg.seed)
    draws = iter(xi_stream) if xi_stream is not None else None
    # compiled chunked path; per-iteration numpy path is the reference.
    # Stop checks happen at chunk boundaries (every trace_every steps).
    use_fast = (
        _fastloops.HAVE_NUMBA and not problem.sparse and draws is None
    )
    if use_fast:
        s_full = (
            np.full(problem.dim1, float(s_coeff))
            if np.isscalar(s_coeff)
            else np.asarray(s_coeff, dtype=float)
        )
        gstart, gstop = reg_blocks(problem.reg, problem.dim2)
        alpha_eff = float(cfg.alpha) if two_factor else 0.0
        gamma_eff = float(cfg.gamma) if two_factor else 1.0

    x1 = np.zeros(problem.dim1)
    x2 = np.full(problem.dim2, float(cfg.x2_init))
    lam = np.zeros(problem.m)
    log = RunLog(problem, algorithm, run_id=run_id, trace_every=cfg.trace_every)
    converged = False
    last_eta = math.nan
    move = math.inf  # ||x1^{k+1} - x1^k||, guards against a residual that
    # vanishes transiently when the multiplier absorbs the threshold exactly

    while True:
        if (log.count and move <= cfg.eps
                and np.linalg.norm(problem.residual(x1, x2)) <= cfg.eps):
            converged = True
            break
        if log.count >= cfg.max_outer:
            break
        if pass_budget is not None and log.data_passes >= pass_budget:
            break

        if use_fast:
            chunk = min(cfg.trace_every, cfg.max_outer - log.count)
            if pass_budget is not None:
                rem = math.ceil((pass_budget - log.data_passes) * n)
                chunk = min(chunk, max(int(rem), 1))
            xi = rng.integers(0, n, size=chunk)
            move = _fastloops.stochastic_chunk(
                problem.X, problem.Y, problem.kind == "logistic",
                x1, x2, lam, log.sum_x1, log.sum_x2, log.sum_lam,
                xi, log.count, eta0, cfg.eta_decay, alpha_eff, gamma_eff,
                beta, s_full, a, problem.reg.zeta, gstart, gstop,
            )
            log.count += chunk
            last_eta = eta0 / log.count**cfg.eta_decay
            _check_finite(x1, x2, lam, beta, last_eta, log)
            log.charge(chunk / n, chunk)
            log.record(x1, x2, M_k=1, eta_k=last_eta)
            continue

        if draws is not None:
            try:
                xi = int(next(draws))
            except StopIteration:
                break
        else:
            xi = int(rng.integers(0, n, size=1)[0])
        eta = eta0 / (log.count + 1) ** cfg.eta_decay
        last_eta = eta

        g = problem.component_gradient(xi, x1)
        x1_new = linearized_x1_step(x1, g, lam, x2, beta, 1.0 / eta, s_coeff)
        if two_factor:
            lam_half = lam - (cfg.alpha * beta) * problem.residual(x1_new, x2)
        else:
            lam_half = lam
        x2_new = consensus_x2_step(x2, x1_new, lam_half, beta, a, problem.reg)
        r_full = problem.residual(x1_new, x2_new)
        if two_factor:
            lam_new = lam_half - (cfg.gamma * beta) * r_full
        else:
            lam_new = lam - beta * r_full
        _check_finite(x1_new, x2_new, lam_new, beta, eta, log)

        move = float(np.linalg.norm(x1_new - x1))
        x1, x2, lam = x1_new, x2_new, lam_new
        log.charge(1.0 / n, 1)
        log.push_iterate(x1, x2, lam)
        log.record(x1, x2, M_k=1, eta_k=eta)

    if log.count:
        log.record(x1, x2, M_k=1, eta_k=last_eta, force=True)
    return log.result(x1, x2, lam, converged, info={"eta0": eta0})


def s_admm_solve(problem, cfg, pass_budget=None, run_id="run0", xi_stream=None):
    """Stochastic single-multiplier splitting: linearized first-block step,
    proximal second block, one multiplier update per iteration.

    xi_stream (test hook) replaces the seeded uniform sample draws with an
    explicit index sequence.
    """
    return _stochastic_loop(
        problem,
        cfg,
        two_factor=False,
        algorithm="s_admm",
        pass_budget=pass_budget,
        run_id=run_id,
        xi_stream=xi_stream,
    )


def sspb_scprsm_solve(problem, cfg, pass_budget=None, run_id="run0",
                      xi_stream=None):
    """Stochastic two-factor scheme with proximal terms on both blocks.

    alpha=0, gamma=1, S=0, a=0 reduces it to s_admm_solve step for step.
    """
    return _stochastic_loop(
        problem,
        cfg,
        two_factor=True,
        algorithm="sspb_scprsm",
        pass_budget=pass_budget,
        run_id=run_id,
        xi_stream=xi_stream,
    )


class QuadraticBlockSolver:
    """Cached factorization for the exact first-block solve of the batch
    methods on the regression losses:

        (beta I + (2/n) X^T X) x = rhs.

    Uses a Cholesky factor of the p x p system when p <= n, otherwise the
    matching n x n system through the matrix-inversion identity.
    """

    def __init__(self, problem, beta, cache=True):
        if problem.kind == "logistic":
            raise UnsupportedModelError(
                "exact first-block solve needs a quadratic loss; the "
                "logistic subproblem has no closed form"
            )
        self.problem = problem
        self.beta = float(beta)
        self.cache = cache
        self.factorizations = 0
        self._factor = None
        X = problem.X
        self._X = X.toarray() if sp.issparse(X) else X
        self._woodbury = problem.p > problem.n

    def _factorize(self):
        n, beta = self.problem.n, self.beta
        X = self._X
        try:
            if self._woodbury:
                G = X @ X.T + (beta * n / 2.0) * np.eye(n)
            else:
                G = (2.0 / n) * (X.T @ X) + beta * np.eye(self.problem.p)
            factor = scipy.linalg.cho_factor(G)
        except np.linalg.LinAlgError as err:
            raise RuntimeError(f"first-block factorization failed: {err}") from err
        self.factorizations += 1
        return factor

    def solve(self, rhs):
        factor = self._factor
        if factor is None:
            factor = self._factorize()
            if self.cache:
                self._factor = factor
        if self._woodbury:
            # (beta I + c X^T X)^{-1} = (I - X^T (beta/c I + X X^T)^{-1} X)/beta
            inner = scipy.linalg.cho_solve(factor, self._X @ rhs)
            return (rhs - self._X.T @ inner) / self.beta
        return scipy.linalg.cho_solve(factor, rhs)


def _batch_loop(problem, cfg, *, algorithm, pass_budget, run_id):
    cfg.validate_common()
    _require_consensus(problem, algorithm)
    two_factor = algorithm == "sc_prsm"
    if two_factor and not 0.0 < cfg.alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {cfg.alpha}")
    n = problem.n
    beta = cfg.beta
    solver = QuadraticBlockSolver(problem, beta, cache=cfg.cache_factorization)
    rhs_const = (2.0 / n) * (problem.X.T @ problem.Y)
    rhs_const = np.asarray(rhs_const).ravel()

    x1 = np.zeros(problem.dim1)
    x2 = np.full(problem.dim2, float(cfg.x2_init))
    lam = np.zeros(problem.m)
    log = RunLog(problem, algorithm, run_id=run_id, trace_every=cfg.trace_every)
    converged = False
    move = math.inf

    while True:
        if (log.count and move <= cfg.eps
                and np.linalg.norm(problem.residual(x1, x2)) <= cfg.eps):
            converged = True
            break
        if log.count >= cfg.max_outer:
            break
        if pass_budget is not None and log.data_passes >= pass_budget:
            break

        x1_new = solver.solve(rhs_const + lam + beta * x2)
        if two_factor:
            lam_half = lam - (cfg.alpha * beta) * problem.residual(x1_new, x2)
            x2_new = consensus_x2_step(x2, x1_new, lam_half, beta, 0.0, problem.reg)
            lam_new = lam_half - (cfg.alpha * beta) * problem.residual(x1_new, x2_new)
        else:
            x2_new = consensus_x2_step(x2, x1_new, lam, beta, 0.0, problem.reg)
            lam_new = lam - beta * problem.residual(x1_new, x2_new)
        _check_finite(x1_new, x2_new, lam_new, beta, math.nan, log)

        move = float(np.linalg.norm(x1_new - x1))
        x1, x2, lam = x1_new, x2_new, lam_new
        log.charge(1.0, n)
        log.push_iterate(x1, x2, lam)
        log.record(x1, x2)

    if log.count:
        log.record(x1, x2, force=True)
    return log.result(
        x1, x2, lam, converged, info={"factorizations": solver.factorizations}
    )


def batch_admm_solve(problem, cfg, pass_budget=None, run_id="run0"):
    """Batch splitting with exact first-block solves and one multiplier
    update per iteration. Regression losses only."""
    return _batch_loop(
        problem, cfg, algorithm="batch_admm", pass_budget=pass_budget, run_id=run_id
    )


def sc_prsm_solve(problem, cfg, pass_budget=None, run_id="run0"):
    """Strictly contractive variant: exact first-block solve, then half and
    full multiplier updates sharing one relaxation factor alpha in (0, 1)."""
    return _batch_loop(
        problem, cfg, algorithm="sc_prsm", pass_budget=pass_budget, run_id=run_id
    )
