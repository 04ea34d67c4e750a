"""Synthetic instance generators, regularization rules, and dataset I/O.

Generators are pure functions of their arguments including the seed.
Disk formats: LIBSVM sparse text ("label idx:val ..." with 1-based,
strictly ascending indices) and headered numeric CSV. An optional JSON
sidecar (same stem, ".meta.json") carries kind, groups, truth, and seed
so generated instances survive a round trip.
"""

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ParseError


@dataclass
class Dataset:
    X: object               # ndarray (n, p) or scipy sparse
    Y: np.ndarray
    groups: list | None = None       # contiguous block sizes, sum = p
    truth: tuple | None = None       # (Z_true, support indices)
    meta: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]


def _normalize_rows(X):
    norms = np.linalg.norm(X, axis=1)
    norms[norms == 0.0] = 1.0
    return X / norms[:, None]


def _draw_truth(rng, p, s):
    support = np.sort(rng.choice(p, size=s, replace=False))
    z = np.zeros(p)
    z[support] = rng.standard_normal(s)
    return z, support


def gen_lasso(n, p, s, noise_sd=0.1, seed=0):
    """Dense regression design: standard normal entries, unit-norm rows,
    s-sparse standard normal coefficients, additive Gaussian noise."""
    if s > p:
        raise ValueError(f"support size {s} exceeds dimension {p}")
    rng = np.random.default_rng(seed)
    X = _normalize_rows(rng.standard_normal((n, p)))
    z, support = _draw_truth(rng, p, s)
    Y = X @ z + noise_sd * rng.standard_normal(n)
    meta = {"name": f"lasso_n{n}_p{p}_s{s}", "kind": "lasso", "n": n, "p": p,
            "seed": seed}
    return Dataset(X=X, Y=Y, truth=(z, support), meta=meta)


def gen_group_lasso(n, N, max_group=30, noise_sd=0.1, seed=0):
    """Grouped design: N blocks with sizes uniform on {1..max_group};
    floor(0.15 * size) active coefficients per block."""
    if N < 1 or max_group < 1:
        raise ValueError("N and max_group must be >= 1")
    rng = np.random.default_rng(seed)
    sizes = rng.integers(1, max_group + 1, size=N)
    p = int(sizes.sum())
    X = _normalize_rows(rng.standard_normal((n, p)))
    z = np.zeros(p)
    start = 0
    support = []
    for size in sizes:
        active = int(np.floor(0.15 * size))
        if active > 0:
            pos = start + np.sort(rng.choice(size, size=active, replace=False))
            z[pos] = rng.standard_normal(active)
            support.extend(pos.tolist())
        start += int(size)
    Y = X @ z + noise_sd * rng.standard_normal(n)
    meta = {"name": f"grouplasso_n{n}_N{N}", "kind": "group_lasso", "n": n,
            "p": p, "seed": seed}
    return Dataset(X=X, Y=Y, groups=[int(s) for s in sizes],
                   truth=(z, np.array(support, dtype=int)), meta=meta)


def gen_sparse_logistic(n, p, s, row_nnz=20, noise_sd=0.1, seed=0):
    """Sparse classification design: each row carries exactly row_nnz
    standard normal entries at uniform positions; labels are the sign of
    the noisy linear response, with sign(0) taken as +1."""
    if row_nnz > p:
        raise ValueError(f"row_nnz {row_nnz} exceeds dimension {p}")
    if s > p:
        raise ValueError(f"support size {s} exceeds dimension {p}")
    rng = np.random.default_rng(seed)
    indptr = np.arange(0, (n + 1) * row_nnz, row_nnz)
    indices = np.empty(n * row_nnz, dtype=np.int32)
    for i in range(n):
        indices[i * row_nnz:(i + 1) * row_nnz] = np.sort(
            rng.choice(p, size=row_nnz, replace=False)
        )
    data = rng.standard_normal(n * row_nnz)
    X = sp.csr_matrix((data, indices, indptr), shape=(n, p))
    z, support = _draw_truth(rng, p, s)
    margin = X @ z + noise_sd * rng.standard_normal(n)
    Y = np.where(margin >= 0.0, 1.0, -1.0)
    meta = {"name": f"logistic_n{n}_p{p}_s{s}", "kind": "logistic", "n": n,
            "p": p, "seed": seed}
    return Dataset(X=X, Y=Y, truth=(z, support), meta=meta)


def regularization_zeta(dataset, kind=None):
    """Kind-matched regularization level.

    lasso: 0.1 * ||X z||_inf. group lasso: 0.1 * max_g ||X_g z_g||_2.
    logistic: (0.1/n) * || sum of positive-class rows ||_inf. The two
    regression rules need the generating truth; loaded data without truth
    must supply an explicit value instead.
    """
    kind = kind or dataset.meta.get("kind")
    if kind in ("lasso", "group_lasso"):
        if dataset.truth is None:
            raise ValueError("regularization rule needs dataset.truth (Z)")
        z = dataset.truth[0]
        if kind == "lasso":
            return 0.1 * float(np.abs(dataset.X @ z).max())
        if not dataset.groups:
            raise ValueError("group rule needs dataset.groups")
        best = 0.0
        start = 0
        X = dataset.X
        for size in dataset.groups:
            cols = slice(start, start + size)
            best = max(best, float(np.linalg.norm(X[:, cols] @ z[cols])))
            start += size
        return 0.1 * best
    if kind == "logistic":
        if dataset.Y is None:
            raise ValueError("logistic rule needs dataset.Y")
        mask = dataset.Y == 1.0
        X = dataset.X
        pos_sum = np.asarray(X[mask].sum(axis=0)).ravel()
        return 0.1 / dataset.n * float(np.abs(pos_sum).max())
    raise ValueError(f"unknown kind {kind!r}")


# -- LIBSVM format -----------------------------------------------------------


def load_libsvm(path, n_features=None):
    """Parse LIBSVM sparse text into a Dataset.

    Indices are 1-based and strictly ascending on disk, 0-based in memory.
    The width defaults to the largest index seen; n_features pins it for
    dataset families with trailing all-zero columns.
    """
    labels = []
    rows = []
    max_idx = 0
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split()
            try:
                label = float(parts[0])
            except ValueError:
                raise ParseError(
                    f"bad label {parts[0]!r}", path=path, line=lineno
                ) from None
            entries = []
            prev = 0
            for tok in parts[1:]:
                idx_s, _, val_s = tok.partition(":")
                try:
                    idx = int(idx_s)
                    val = float(val_s)
                except ValueError:
                    raise ParseError(
                        f"bad feature token {tok!r}", path=path, line=lineno
                    ) from None
                if idx < 1:
                    raise ParseError(
                        f"index {idx} is not 1-based", path=path, line=lineno
                    )
                if idx <= prev:
                    raise ParseError(
                        f"indices not strictly ascending at {tok!r}",
                        path=path,
                        line=lineno,
                    )
                prev = idx
                entries.append((idx - 1, val))
            max_idx = max(max_idx, prev)
            labels.append(label)
            rows.append(entries)
    if n_features is not None:
        if max_idx > n_features:
            raise ParseError(
                f"index {max_idx} exceeds requested width {n_features}", path=path
            )
        p = int(n_features)
    else:
        p = max_idx
    n = len(labels)
    indptr = np.zeros(n + 1, dtype=np.int64)
    for i, entries in enumerate(rows):
        indptr[i + 1] = indptr[i] + len(entries)
    indices = np.empty(indptr[-1], dtype=np.int64)
    data = np.empty(indptr[-1])
    pos = 0
    for entries in rows:
        for idx, val in entries:
            indices[pos] = idx
            data[pos] = val
            pos += 1
    X = sp.csr_matrix((data, indices, indptr), shape=(n, p))
    ds = Dataset(X=X, Y=np.array(labels), meta={"name": os.path.basename(path)})
    _attach_sidecar(ds, path)
    return ds


def save_libsvm(path, dataset):
    """Write a Dataset in LIBSVM text form (values in round-trip repr)."""
    X = dataset.X
    issp = sp.issparse(X)
    Xr = X.tocsr() if issp else np.asarray(X)
    with open(path, "w") as fh:
        for i in range(dataset.n):
            parts = [repr(float(dataset.Y[i]))]
            if issp:
                lo, hi = Xr.indptr[i], Xr.indptr[i + 1]
                cols = Xr.indices[lo:hi]
                vals = Xr.data[lo:hi]
                order = np.argsort(cols)
                cols, vals = cols[order], vals[order]
            else:
                cols = np.nonzero(Xr[i])[0]
                vals = Xr[i, cols]
            for c, v in zip(cols, vals):
                parts.append(f"{int(c) + 1}:{float(v)!r}")
            fh.write(" ".join(parts) + "\n")
    _write_sidecar(dataset, path)


# -- CSV format ---------------------------------------------------------------


def load_csv(path, label_column, normalize_rows=False):
    """Read a rectangular numeric CSV with a header row.

    The named column becomes the response; the rest form the dense design
    matrix. normalize_rows rescales every sample to unit l2 norm.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", path=path) from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise ParseError(
                f"label column {label_column!r} not in header {header}", path=path
            )
        label_idx = header.index(label_column)
        width = len(header)
        rows = []
        labels = []
        for lineno, cells in enumerate(reader, start=2):
            if not cells:
                continue
            if len(cells) != width:
                raise ParseError(
                    f"row has {len(cells)} cells, expected {width}",
                    path=path,
                    line=lineno,
                )
            values = []
            for col, cell in enumerate(cells):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise ParseError(
                        f"non-numeric cell {cell!r} in column "
                        f"{header[col]!r}",
                        path=path,
                        line=lineno,
                    ) from None
            labels.append(values.pop(label_idx))
            rows.append(values)
    X = np.array(rows) if rows else np.zeros((0, width - 1))
    if normalize_rows and X.size:
        X = _normalize_rows(X)
    ds = Dataset(X=X, Y=np.array(labels), meta={"name": os.path.basename(path)})
    _attach_sidecar(ds, path)
    return ds


# -- sidecar metadata ----------------------------------------------------------


def _sidecar_path(path):
    stem, _ = os.path.splitext(path)
    return stem + ".meta.json"


def _write_sidecar(dataset, path):
    payload = dict(dataset.meta)
    if dataset.groups:
        payload["groups"] = list(dataset.groups)
    if dataset.truth is not None:
        z, support = dataset.truth
        payload["truth_z"] = [float(v) for v in z]
        payload["truth_support"] = [int(i) for i in support]
    with open(_sidecar_path(path), "w") as fh:
        json.dump(payload, fh)


def _attach_sidecar(dataset, path):
    side = _sidecar_path(path)
    if not os.path.exists(side):
        return
    with open(side) as fh:
        payload = json.load(fh)
    if "groups" in payload:
        dataset.groups = [int(s) for s in payload.pop("groups")]
    z = payload.pop("truth_z", None)
    supp = payload.pop("truth_support", None)
    if z is not None:
        dataset.truth = (np.array(z), np.array(supp if supp is not None else [],
                                               dtype=int))
    dataset.meta.update(payload)


# -- presets -------------------------------------------------------------------

# Synthetic designs at their published scale, plus the four real datasets
# (loaders only; files are supplied by the caller).
DATASET_PRESETS = {
    "lasso5.1": {
        "kind": "lasso",
        "gen": lambda seed=0: gen_lasso(2000, 5000, 200, noise_sd=0.1, seed=seed),
    },
    "grouplasso5.2": {
        "kind": "group_lasso",
        "gen": lambda seed=0: gen_group_lasso(3000, 300, 30, noise_sd=0.1,
                                              seed=seed),
    },
    "logistic5.3": {
        "kind": "logistic",
        "gen": lambda seed=0: gen_sparse_logistic(100, 400, 100, row_nnz=20,
                                                  noise_sd=0.1, seed=seed),
    },
    "crime": {"kind": "lasso", "loader": "csv", "zeta": 0.02,
              "n": 1994, "p": 122},
    "e2006": {"kind": "lasso", "loader": "libsvm", "zeta": 0.0001,
              "n": 16087, "p": 150360},
    "sido": {"kind": "logistic", "loader": "libsvm", "zeta": 0.01,
             "n": 12678, "p": 4932},
    "nslkdd": {"kind": "logistic", "loader": "csv", "zeta": 0.01,
               "n": 125973, "p": 115},
}


def generate_preset(name, seed=0):
    spec = DATASET_PRESETS.get(name)
    if spec is None:
        raise ValueError(
            f"unknown preset {name!r}; available: {sorted(DATASET_PRESETS)}"
        )
    if "gen" not in spec:
        raise ValueError(
            f"preset {name!r} is a real-data loader preset; supply a file path"
        )
    return spec["gen"](seed)
