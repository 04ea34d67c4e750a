"""Stochastic scalable Peaceman-Rachford splitting (SS-PRSM).

Outer scheme: two relaxed multiplier updates (factors alpha and gamma)
around a proximal second-block step with T = a*I. First-block update:
a variance-reduced stochastic gradient inner loop on the proximal
surrogate of the augmented Lagrangian, returning the inner average.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _fastloops
from .errors import DivergenceError, UnsupportedModelError
from .numkit import PsdMat
from .trace import RunLog


def reg_blocks(reg, dim):
    """Block boundary arrays for the prox kernels; the elementwise l1 case
    is the blockwise one over singleton blocks."""
    if reg.kind == "l1":
        gstart = np.arange(dim, dtype=np.int64)
        return gstart, gstart + 1
    gstart = np.array([sl.start for sl in reg.slices], dtype=np.int64)
    gstop = np.array([sl.stop for sl in reg.slices], dtype=np.int64)
    return gstart, gstop


def gamma_max(alpha):
    """Upper end of the feasible range for the full-step relaxation factor.

    gamma must lie in (0, (1 - alpha + sqrt((1+alpha)^2 + 4(1-alpha^2))) / 2)
    for the two-factor scheme to contract.
    """
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must be in [0, 1), got {alpha}")
    return (1.0 - alpha + math.sqrt((1.0 + alpha) ** 2 + 4.0 * (1.0 - alpha**2))) / 2.0


@dataclass
class SolverConfig:
    """Parameters of the SS-PRSM run.

    S is the first-block proximal matrix; the second-block matrix is a*I.
    diameter_D scales the schedule constant C (problem dimension when left
    unset; C_override bypasses the formula entirely). M_cap bounds the
    inner iteration count (2n when unset).
    """

    beta: float = 1.0
    alpha: float = 0.9
    gamma: float = 0.1
    S: PsdMat = field(default_factory=PsdMat.zero)
    a: float = 0.0
    eps: float = 1e-10
    max_outer: int = 1000
    C_override: float | None = None
    M_cap: int | None = None
    diameter_D: float | None = None
    seed: int = 0
    x2_init: float = 1.0
    trace_every: int = 1

    def validate(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError(f"alpha must be in [0, 1), got {self.alpha}")
        gmax = gamma_max(self.alpha)
        if not 0.0 < self.gamma < gmax:
            raise ValueError(
                f"gamma={self.gamma} outside (0, {gmax:.4f}) for alpha={self.alpha}"
            )
        if self.a < 0:
            raise ValueError(f"a must be nonnegative, got {self.a}")
        if self.max_outer < 1:
            raise ValueError("max_outer must be >= 1")
        if self.C_override is not None and not self.C_override > 0:
            raise ValueError("C_override must be positive")
        if self.M_cap is not None and self.M_cap < 1:
            raise ValueError("M_cap must be >= 1")
        if self.diameter_D is not None and not self.diameter_D > 0:
            raise ValueError("diameter_D must be positive")
        if self.trace_every < 1:
            raise ValueError("trace_every must be >= 1")
        return self


@dataclass
class ScheduleConstants:
    C: float
    nu: float
    sigma_A: float
    sigma_S: float


def schedule_constants(problem, config):
    """Resolve the inner-schedule constant C = D * (nu + beta*sigma_A^2 + sigma_S)."""
    nu = problem.smoothness_constant()
    sigma_A = problem.A.spectral_norm()
    sigma_S = config.S.spectral_norm()
    if config.C_override is not None:
        C = float(config.C_override)
    else:
        D = config.diameter_D if config.diameter_D is not None else float(problem.dim1)
        C = D * (nu + config.beta * sigma_A**2 + sigma_S)
    if not C > 0:
        raise ValueError("schedule constant C must be positive")
    return ScheduleConstants(C=C, nu=nu, sigma_A=sigma_A, sigma_S=sigma_S)


def inner_schedule(k, consts, C_k, cap=None):
    """Inner iteration count and step size for outer step k (0-based).

    M_k = min(cap, ceil(C^2 + C_k^2)), eta_k = 1 / (M_k * (k+1)^2) with the
    capped M_k, so eta_k * M_k * (k+1)^2 = 1 holds on every emitted row.
    """
    M = math.ceil(consts.C**2 + C_k**2)
    if cap is not None:
        M = min(int(cap), M)
    M = max(1, M)
    eta = 1.0 / (M * (k + 1) ** 2)
    return M, eta


def variance_reduced_gradient(problem, x, anchor, mu_tilde, i, beta, S):
    """Single-sample surrogate gradient with the anchor correction:

    (G_i'(x) - G_i'(anchor)) + mu_tilde, which reduces to
    theta1_i'(x) - theta1_i'(anchor) + (beta A^T A + S)(x - anchor) + mu_tilde.

    Averaging over all samples i recovers the full surrogate gradient at x
    exactly whenever mu_tilde is the full surrogate gradient at the anchor.
    """
    diff = problem.component_gradient(i, x) - problem.component_gradient(i, anchor)
    d = x - anchor
    if problem.A.is_identity or problem.A.is_neg_identity:
        quad = beta * d
    else:
        quad = beta * problem.A.rmatvec(problem.A.matvec(d))
    if S.kind != "zero":
        quad = quad + S.matvec(d)
    return diff + quad + mu_tilde


def run_inner_loop(problem, anchor, mu_tilde, beta, s_coeff, eta, M, rng,
                   full_grad=False):
    """M-point inner loop; returns the average of the M trajectory points.

    The trajectory starts at the anchor and takes M-1 variance-reduced
    steps, so M = 1 returns the anchor unchanged. The average accumulates
    incrementally. full_grad swaps the sampled gradient for the exact
    surrogate gradient (deterministic averaged gradient descent).
    """
    p = anchor.size
    d = np.zeros(p)          # current point minus the anchor
    acc = np.zeros(p)        # sum of d over trajectory points 1..M-1
    if M > 1:
        if full_grad:
            fg_anchor = problem.full_gradient(anchor)
            for _ in range(M - 1):
                g = mu_tilde + (problem.full_gradient(anchor + d) - fg_anchor)
                g += beta * d
                if not np.isscalar(s_coeff) or s_coeff != 0.0:
                    g += s_coeff * d
                d = d - eta * g
                acc += d
        elif _fastloops.HAVE_NUMBA:
            draws = rng.integers(0, problem.n, size=M - 1)
            logistic = problem.kind == "logistic"
            margins = problem.vr_aux(anchor)
            if margins is None:
                margins = np.empty(0)
            s_full = (
                np.full(p, float(s_coeff))
                if np.isscalar(s_coeff)
                else np.asarray(s_coeff, dtype=float)
            )
            if problem.sparse:
                X = problem.X
                _fastloops.svrg_inner_sparse(
                    X.indptr, X.indices, X.data, problem.Y, logistic, anchor,
                    margins, mu_tilde, beta, s_full, eta, draws, acc,
                )
            else:
                _fastloops.svrg_inner_dense(
                    problem.X, problem.Y, logistic, anchor, margins,
                    mu_tilde, beta, s_full, eta, draws, acc,
                )
        else:
            aux = problem.vr_aux(anchor)
            pen = beta + s_coeff  # scalar or per-coordinate vector
            draws = rng.integers(0, problem.n, size=M - 1)
            for i in draws:
                g = mu_tilde + pen * d
                problem.add_scaled_row(g, i, problem.vr_factor(i, d, aux))
                d = d - eta * g
                acc += d
    x_new = anchor + acc / M
    if not np.all(np.isfinite(x_new)):
        raise DivergenceError(
            f"inner loop diverged (beta={beta}, eta={eta})", beta=beta, eta=eta
        )
    return x_new


def consensus_x2_step(x2, x1_new, lam, beta, a, reg):
    """Closed-form proximal second-block update for the consensus split:

    prox of theta2/(a+beta) at (a*x2 + beta*x1_new - lam) / (a + beta).
    """
    w = (a * x2 + beta * x1_new - lam) / (a + beta)
    return reg.prox(w, 1.0 / (a + beta))


def ss_prsm_solve(problem, config, pass_budget=None, run_id="run0",
                  keep_iterates=False):
    """Run SS-PRSM until the residual drops below eps, the outer-iteration
    cap is hit, or the data-pass budget is exhausted.

    Returns a SolveResult carrying the ergodic averages, the final
    iterates, and the trace. Raises DivergenceError (with the trace so
    far attached) if an iterate leaves the finite range.
    """
    config.validate()
    if not problem.is_consensus:
        raise UnsupportedModelError(
            "SS-PRSM's second-block update is closed-form only for the "
            "consensus split"
        )
    n = problem.n
    consts = schedule_constants(problem, config)
    cap = config.M_cap if config.M_cap is not None else 2 * n
    rng = np.random.default_rng(config.seed)
    s_coeff = config.S.as_coeff(problem.dim1)
    beta, alpha, gamma, a = config.beta, config.alpha, config.gamma, config.a

    x1 = np.zeros(problem.dim1)
    x2 = np.full(problem.dim2, float(config.x2_init))
    lam = np.zeros(problem.m)
    log = RunLog(problem, "ss_prsm", run_id=run_id, trace_every=config.trace_every)
    iterates = [] if keep_iterates else None
    converged = False
    last_sched = (math.nan, 0, math.nan)
    move = math.inf  # first-block movement; keeps a transiently vanishing
    # residual (multiplier absorbing the threshold) from stopping the run

    while True:
        if (log.count and move <= config.eps
                and np.linalg.norm(problem.residual(x1, x2)) <= config.eps):
            converged = True
            break
        if log.count >= config.max_outer:
            break
        if pass_budget is not None and log.data_passes >= pass_budget:
            break

        mu = problem.surrogate_gradient(x1, x1, x2, lam, beta, config.S)
        C_k = float(np.linalg.norm(mu))
        if not math.isfinite(C_k):
            raise DivergenceError(
                f"surrogate gradient diverged (beta={beta}, eta={last_sched[2]})",
                beta=beta,
                eta=last_sched[2],
                trace=log.records,
            )
        M_k, eta_k = inner_schedule(log.count, consts, C_k, cap)
        try:
            x1_new = run_inner_loop(problem, x1, mu, beta, s_coeff, eta_k, M_k, rng)
        except DivergenceError as err:
            err.trace = log.records
            raise
        log.charge(1.0 + 2.0 * M_k / n, 2 * M_k + n)

        lam_half = lam - (alpha * beta) * problem.residual(x1_new, x2)
        x2_new = consensus_x2_step(x2, x1_new, lam_half, beta, a, problem.reg)
        lam_new = lam_half - (gamma * beta) * problem.residual(x1_new, x2_new)
        if not (np.all(np.isfinite(x2_new)) and np.all(np.isfinite(lam_new))):
            raise DivergenceError(
                f"outer step diverged (beta={beta}, eta={eta_k})",
                beta=beta,
                eta=eta_k,
                trace=log.records,
            )

        move = float(np.linalg.norm(x1_new - x1))
        x1, x2, lam = x1_new, x2_new, lam_new
        log.push_iterate(x1, x2, lam)
        if iterates is not None:
            iterates.append((x1.copy(), x2.copy(), lam.copy()))
        last_sched = (C_k, M_k, eta_k)
        log.record(x1, x2, C_k=C_k, M_k=M_k, eta_k=eta_k)

    if log.count:
        log.record(
            x1, x2, C_k=last_sched[0], M_k=last_sched[1], eta_k=last_sched[2],
            force=True,
        )
    info = {
        "C": consts.C,
        "nu": consts.nu,
        "sigma_A": consts.sigma_A,
        "sigma_S": consts.sigma_S,
        "M_cap": cap,
    }
    if iterates is not None:
        info["iterates"] = iterates
    return log.result(x1, x2, lam, converged, info=info)
