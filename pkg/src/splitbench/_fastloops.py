"""Jitted hot loops for the sequential stochastic recursions.

The per-iteration work is a handful of length-p vector operations, so the
pure-numpy loops are interpreter-bound. When numba is available these
kernels run the same recursions compiled; the numpy fallbacks in the
solver modules remain the reference implementations.

Both regularizers are handled by one prox kernel: the elementwise l1
soft-threshold is the blockwise l2 one applied to singleton blocks.
"""

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is an optional accelerator
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


@njit(cache=True)
def _expit(t):
    if t >= 0.0:
        return 1.0 / (1.0 + np.exp(-t))
    e = np.exp(t)
    return e / (1.0 + e)


@njit(cache=True)
def _block_prox(w, kappa, gstart, gstop, out):
    for g in range(gstart.size):
        lo, hi = gstart[g], gstop[g]
        nrm = 0.0
        for j in range(lo, hi):
            nrm += w[j] * w[j]
        nrm = np.sqrt(nrm)
        if nrm <= kappa:
            for j in range(lo, hi):
                out[j] = 0.0
        else:
            scale = 1.0 - kappa / nrm
            for j in range(lo, hi):
                out[j] = scale * w[j]


@njit(cache=True)
def stochastic_chunk(X, Y, logistic, x1, x2, lam, sum1, sum2, suml, xi,
                     k0, eta0, decay, alpha, gamma, beta, s_vec, a, zeta,
                     gstart, gstop):
    """Run len(xi) iterations of the two-factor stochastic recursion in
    place; returns the last iteration's first-block movement.

    alpha=0, gamma=1, s_vec=0, a=0 gives the single-multiplier scheme.
    """
    n, p = X.shape
    x1n = np.empty(p)
    w = np.empty(p)
    x2n = np.empty(p)
    move = 0.0
    for t in range(xi.size):
        i = xi[t]
        k = k0 + t
        eta = eta0 / (k + 1.0) ** decay
        inv_eta = 1.0 / eta
        # per-sample gradient factor
        dot = 0.0
        for j in range(p):
            dot += X[i, j] * x1[j]
        if logistic:
            factor = -Y[i] * _expit(-Y[i] * dot)
        else:
            factor = 2.0 * (dot - Y[i])
        # linearized first-block minimizer
        move = 0.0
        for j in range(p):
            numer = x1[j] * inv_eta + s_vec[j] * x1[j] + lam[j] \
                + beta * x2[j] - factor * X[i, j]
            v = numer / (beta + inv_eta + s_vec[j])
            d = v - x1[j]
            move += d * d
            x1n[j] = v
        move = np.sqrt(move)
        # half multiplier step, proximal second block, full multiplier step
        ab = a + beta
        for j in range(p):
            lam[j] = lam[j] - (alpha * beta) * (x1n[j] - x2[j])
            w[j] = (a * x2[j] + beta * x1n[j] - lam[j]) / ab
        _block_prox(w, zeta / ab, gstart, gstop, x2n)
        for j in range(p):
            lam[j] = lam[j] - (gamma * beta) * (x1n[j] - x2n[j])
            x1[j] = x1n[j]
            x2[j] = x2n[j]
            sum1[j] += x1n[j]
            sum2[j] += x2n[j]
            suml[j] += lam[j]
    return move


@njit(cache=True)
def svrg_inner_dense(X, Y, logistic, anchor, margins, mu, beta, s_vec,
                     eta, xi, acc):
    """Variance-reduced inner loop over a dense sample matrix.

    Accumulates the trajectory sum into acc and returns nothing; caller
    forms the average. margins holds Y_i * X_i^T anchor for the logistic
    factor (ignored otherwise).
    """
    p = anchor.size
    d = np.zeros(p)
    g = np.empty(p)
    for t in range(xi.size):
        i = xi[t]
        dot = 0.0
        for j in range(p):
            dot += X[i, j] * d[j]
        if logistic:
            v2 = margins[i]
            factor = Y[i] * (_expit(v2 + Y[i] * dot) - _expit(v2))
        else:
            factor = 2.0 * dot
        for j in range(p):
            g[j] = mu[j] + (beta + s_vec[j]) * d[j] + factor * X[i, j]
        for j in range(p):
            d[j] -= eta * g[j]
            acc[j] += d[j]


@njit(cache=True)
def svrg_inner_sparse(indptr, indices, data, Y, logistic, anchor, margins,
                      mu, beta, s_vec, eta, xi, acc):
    p = anchor.size
    d = np.zeros(p)
    g = np.empty(p)
    for t in range(xi.size):
        i = xi[t]
        dot = 0.0
        for q in range(indptr[i], indptr[i + 1]):
            dot += data[q] * d[indices[q]]
        if logistic:
            v2 = margins[i]
            factor = Y[i] * (_expit(v2 + Y[i] * dot) - _expit(v2))
        else:
            factor = 2.0 * dot
        for j in range(p):
            g[j] = mu[j] + (beta + s_vec[j]) * d[j]
        for q in range(indptr[i], indptr[i + 1]):
            g[indices[q]] += factor * data[q]
        for j in range(p):
            d[j] -= eta * g[j]
            acc[j] += d[j]
