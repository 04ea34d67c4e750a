"""Numeric kernels shared by every solver.

Proximal (soft-threshold) maps, the restricted family of positive
semidefinite penalty matrices, linear constraint maps over dense or
sparse-row storage, and power-iteration spectral-norm estimation.
"""

import numpy as np
import scipy.sparse as sp


def assert_all_finite(arr, name="array"):
    """Reject NaN/Inf before it enters solver state."""
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")


def soft_threshold(v, kappa):
    """Elementwise soft-threshold: sign(v_i) * max(|v_i| - kappa, 0).

    The value at v_i = 0 is 0 (limit of the l1 prox).
    """
    if kappa < 0:
        raise ValueError(f"soft_threshold needs kappa >= 0, got {kappa}")
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - kappa, 0.0)


def group_soft_threshold(v, kappa):
    """Blockwise soft-threshold: scale v by max(1 - kappa/||v||_2, 0).

    Returns the zero vector when v = 0.
    """
    if kappa < 0:
        raise ValueError(f"group_soft_threshold needs kappa >= 0, got {kappa}")
    v = np.asarray(v, dtype=float)
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        return np.zeros_like(v)
    return max(1.0 - kappa / nrm, 0.0) * v


class PsdMat:
    """Positive semidefinite penalty matrix, restricted to the shapes the
    block subproblems keep closed-form: zero, c*I, or diag(d).

    Symmetric PSD by construction; the constructors reject negative scales.
    """

    __slots__ = ("kind", "c", "d")

    def __init__(self, kind, c=0.0, d=None):
        self.kind = kind
        self.c = float(c)
        self.d = None if d is None else np.asarray(d, dtype=float)

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def scaled_identity(cls, c):
        if c < 0:
            raise ValueError(f"scaled identity needs c >= 0, got {c}")
        return cls("scaled_identity", c=c)

    @classmethod
    def diagonal(cls, d):
        d = np.asarray(d, dtype=float)
        if d.ndim != 1:
            raise ValueError("diagonal spec must be a 1-d array")
        if np.any(d < 0):
            raise ValueError("diagonal entries must be nonnegative")
        return cls("diagonal", d=d)

    @classmethod
    def from_spec(cls, text):
        """Parse config notation: '0', 'I', '5I', '2.5I', or a bare number."""
        t = str(text).strip()
        if t in ("0", "zero", "0I"):
            return cls.zero()
        if t.endswith("I"):
            scale = t[:-1].strip()
            return cls.scaled_identity(float(scale) if scale else 1.0)
        return cls.scaled_identity(float(t))

    def as_coeff(self, dim):
        """Scalar or length-dim vector usable in fused elementwise updates."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "scaled_identity":
            return self.c
        if self.d.size != dim:
            raise ValueError(f"diagonal has dim {self.d.size}, expected {dim}")
        return self.d

    def matvec(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "scaled_identity":
            return self.c * x
        if self.d.size != x.size:
            raise ValueError(f"diagonal has dim {self.d.size}, expected {x.size}")
        return self.d * x

    def quad(self, x):
        """x^T S x, always >= 0."""
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return 0.0
        if self.kind == "scaled_identity":
            return self.c * float(x @ x)
        if self.d.size != x.size:
            raise ValueError(f"diagonal has dim {self.d.size}, expected {x.size}")
        return float(x @ (self.d * x))

    def spectral_norm(self):
        if self.kind == "zero":
            return 0.0
        if self.kind == "scaled_identity":
            return self.c
        return float(self.d.max()) if self.d.size else 0.0

    def __repr__(self):
        if self.kind == "zero":
            return "PsdMat(0)"
        if self.kind == "scaled_identity":
            return f"PsdMat({self.c}*I)"
        return f"PsdMat(diag, dim={self.d.size})"


def weighted_sq_norm(x, S):
    """||x||_S^2 = x^T S x for a PsdMat S."""
    return S.quad(x)


class LinearMap:
    """Constraint-side linear operator: identity, negated identity, a dense
    matrix, or a sparse CSR matrix (rows hold sorted index/value pairs)."""

    __slots__ = ("kind", "mat", "shape")

    def __init__(self, kind, mat=None, shape=None):
        self.kind = kind
        self.mat = mat
        self.shape = shape if shape is not None else mat.shape

    @classmethod
    def identity(cls, n):
        return cls("identity", shape=(n, n))

    @classmethod
    def neg_identity(cls, n):
        return cls("neg_identity", shape=(n, n))

    @classmethod
    def from_matrix(cls, M):
        if sp.issparse(M):
            M = M.tocsr()
            if np.any(M.indices >= M.shape[1]):
                raise ValueError("sparse column index out of range")
            return cls("sparse", mat=M)
        M = np.asarray(M, dtype=float)
        if M.ndim != 2:
            raise ValueError("matrix must be 2-d")
        return cls("dense", mat=M)

    @property
    def is_identity(self):
        return self.kind == "identity"

    @property
    def is_neg_identity(self):
        return self.kind == "neg_identity"

    def matvec(self, x):
        if self.kind == "identity":
            return x
        if self.kind == "neg_identity":
            return -x
        return self.mat @ x

    def rmatvec(self, y):
        if self.kind == "identity":
            return y
        if self.kind == "neg_identity":
            return -y
        if self.kind == "sparse":
            return self.mat.T @ y
        return self.mat.T @ y

    def to_dense(self):
        if self.kind == "identity":
            return np.eye(self.shape[0])
        if self.kind == "neg_identity":
            return -np.eye(self.shape[0])
        if self.kind == "sparse":
            return self.mat.toarray()
        return np.array(self.mat)

    def spectral_norm(self, iters=200):
        if self.kind in ("identity", "neg_identity"):
            return 1.0
        return spectral_norm_estimate(self.mat, iters=iters)


def _matvec_pair(M):
    if isinstance(M, LinearMap):
        return M.matvec, M.rmatvec, M.shape
    if sp.issparse(M):
        M = M.tocsr()
        return (lambda x: M @ x), (lambda y: M.T @ y), M.shape
    M = np.asarray(M, dtype=float)
    return (lambda x: M @ x), (lambda y: M.T @ y), M.shape


def spectral_norm_estimate(M, iters=200):
    """Largest singular value via power iteration on M^T M.

    Deterministic start vector (seeded), estimate monotone nondecreasing in
    the iteration count up to round-off. Returns 0 for an all-zero matrix.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    mv, rmv, shape = _matvec_pair(M)
    rng = np.random.default_rng(0)
    v = rng.standard_normal(shape[1])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        w = mv(v)
        wn = np.linalg.norm(w)
        if wn == 0.0:
            return 0.0
        est = wn  # Rayleigh estimate ||M v|| for unit v
        v = rmv(w)
        vn = np.linalg.norm(v)
        if vn == 0.0:
            return 0.0
        v /= vn
    return float(est)
