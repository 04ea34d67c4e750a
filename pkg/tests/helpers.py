"""Shared test fixtures: small instances with controlled conditioning.

The solver-agreement fixtures use a scaled DCT design (orthonormal
columns, near-equal row leverage) so every solver, stochastic or batch,
can reach tight tolerances inside a modest data-pass budget.
"""

import numpy as np
import scipy.fft

from splitbench.datagen import Dataset


def dct_design(n, p, lam):
    """n x p design with X^T X = lam * I and balanced row norms."""
    return np.sqrt(lam) * scipy.fft.dct(np.eye(n), norm="ortho")[:, 1:p + 1]


def tiny_lasso(n=30, p=10, s=3, lam=600.0, z_scale=0.1, noise_sd=0.01, seed=5):
    rng = np.random.default_rng(seed)
    X = dct_design(n, p, lam)
    z = np.zeros(p)
    supp = np.sort(rng.choice(p, size=s, replace=False))
    z[supp] = z_scale * rng.standard_normal(s)
    Y = X @ z + noise_sd * rng.standard_normal(n)
    return Dataset(X=X, Y=Y, truth=(z, supp),
                   meta={"kind": "lasso", "name": "tiny_lasso"})


def tiny_group(n=40, sizes=(3, 2, 3, 2, 2), lam=800.0, z_scale=0.1,
               noise_sd=0.01, seed=3):
    rng = np.random.default_rng(seed)
    sizes = list(sizes)
    p = sum(sizes)
    X = dct_design(n, p, lam)
    z = np.zeros(p)
    start = 0
    supp = []
    for gi, size in enumerate(sizes):
        if gi % 2 == 0:
            z[start:start + size] = z_scale * rng.standard_normal(size)
            supp.extend(range(start, start + size))
        start += size
    Y = X @ z + noise_sd * rng.standard_normal(n)
    return Dataset(X=X, Y=Y, groups=sizes, truth=(z, np.array(supp)),
                   meta={"kind": "group_lasso", "name": "tiny_group"})


def tiny_logistic(n=60, p=15, s=4, lam=10000.0, z_scale=0.2, seed=11):
    rng = np.random.default_rng(seed)
    X = dct_design(n, p, lam)
    z = np.zeros(p)
    supp = np.sort(rng.choice(p, size=s, replace=False))
    z[supp] = z_scale * rng.standard_normal(s)
    margin = X @ z + 0.01 * rng.standard_normal(n)
    Y = np.where(margin >= 0, 1.0, -1.0)
    return Dataset(X=X, Y=Y, truth=(z, supp),
                   meta={"kind": "logistic", "name": "tiny_logistic"})


def logistic_zeta_max(problem):
    """Smallest zeta whose penalized logistic solution is all zeros."""
    return float(np.abs(problem.full_gradient(np.zeros(problem.dim1))).max())
