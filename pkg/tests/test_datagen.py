import numpy as np
import pytest
import scipy.sparse as sp

import splitbench as sb
from splitbench.datagen import (
    DATASET_PRESETS,
    Dataset,
    gen_group_lasso,
    gen_lasso,
    gen_sparse_logistic,
    generate_preset,
    load_csv,
    load_libsvm,
    regularization_zeta,
    save_libsvm,
)
from splitbench.errors import ParseError


class TestGenLasso:
    def test_unit_row_norms(self):
        ds = gen_lasso(50, 30, 5, seed=0)
        norms = np.linalg.norm(ds.X, axis=1)
        assert np.abs(norms - 1.0).max() <= 1e-12

    def test_support_size(self):
        ds = gen_lasso(20, 40, 7, seed=1)
        z, supp = ds.truth
        assert np.count_nonzero(z) == 7
        assert len(supp) == 7

    def test_deterministic(self):
        a = gen_lasso(15, 10, 3, seed=42)
        b = gen_lasso(15, 10, 3, seed=42)
        assert np.array_equal(a.X, b.X)
        assert np.array_equal(a.Y, b.Y)
        assert np.array_equal(a.truth[0], b.truth[0])

    def test_oversized_support_rejected(self):
        with pytest.raises(ValueError):
            gen_lasso(10, 5, 6)


class TestGenGroupLasso:
    def test_partition_covers_columns(self):
        ds = gen_group_lasso(30, 8, max_group=6, seed=2)
        assert sum(ds.groups) == ds.p

    def test_small_groups_inactive(self):
        ds = gen_group_lasso(30, 40, max_group=6, seed=3)
        z, _ = ds.truth
        start = 0
        for size in ds.groups:
            # floor(0.15 * size) = 0 whenever size <= 6
            assert np.count_nonzero(z[start:start + size]) == 0
            start += size

    def test_group_size_moments(self):
        ds = gen_group_lasso(5, 3000, max_group=30, seed=4)
        sizes = np.array(ds.groups, dtype=float)
        mean, want = sizes.mean(), (1 + 30) / 2
        sd = np.sqrt((30**2 - 1) / 12.0)
        assert abs(mean - want) <= 3 * sd / np.sqrt(3000)

    def test_active_fraction(self):
        ds = gen_group_lasso(10, 200, max_group=30, seed=5)
        z, _ = ds.truth
        start = 0
        for size in ds.groups:
            got = np.count_nonzero(z[start:start + size])
            assert got == int(np.floor(0.15 * size))
            start += size


class TestGenSparseLogistic:
    def test_row_nnz(self):
        ds = gen_sparse_logistic(40, 60, 10, row_nnz=20, seed=6)
        X = ds.X.tocsr()
        counts = np.diff(X.indptr)
        assert np.all(counts == 20)

    def test_labels_are_signs(self):
        ds = gen_sparse_logistic(100, 50, 10, row_nnz=8, seed=7)
        assert set(np.unique(ds.Y)) <= {-1.0, 1.0}

    def test_class_balance(self):
        ds = gen_sparse_logistic(800, 100, 20, row_nnz=10, seed=8)
        frac = float(np.mean(ds.Y == 1.0))
        assert 0.4 <= frac <= 0.6

    def test_indices_sorted_within_rows(self):
        ds = gen_sparse_logistic(30, 40, 5, row_nnz=7, seed=9)
        X = ds.X.tocsr()
        for i in range(30):
            idx = X.indices[X.indptr[i]:X.indptr[i + 1]]
            assert np.all(np.diff(idx) > 0)

    def test_row_nnz_too_large(self):
        with pytest.raises(ValueError):
            gen_sparse_logistic(10, 5, 2, row_nnz=6)


class TestRegularizationZeta:
    def test_lasso_rule(self):
        ds = gen_lasso(30, 20, 5, seed=10)
        z, _ = ds.truth
        assert regularization_zeta(ds) == pytest.approx(
            0.1 * np.abs(ds.X @ z).max(), rel=1e-12
        )

    def test_zero_truth_gives_zero(self):
        ds = gen_lasso(20, 10, 1, seed=11)
        ds.truth = (np.zeros(10), np.array([], dtype=int))
        assert regularization_zeta(ds) == 0.0
        # and a zero level is rejected by the solver-facing path
        from splitbench.problems import Regularizer

        with pytest.raises(ValueError):
            Regularizer("l1", regularization_zeta(ds) - 1.0)

    def test_group_rule(self):
        ds = gen_group_lasso(25, 6, max_group=8, seed=12)
        z, _ = ds.truth
        best = 0.0
        start = 0
        for size in ds.groups:
            cols = slice(start, start + size)
            best = max(best, np.linalg.norm(ds.X[:, cols] @ z[cols]))
            start += size
        assert regularization_zeta(ds) == pytest.approx(0.1 * best, rel=1e-12)

    def test_logistic_hand_instance(self):
        X = np.array([[1.0, -2.0], [3.0, 0.5]])
        ds = Dataset(X=X, Y=np.array([1.0, -1.0]), meta={"kind": "logistic"})
        # only the first row is in the positive class
        assert regularization_zeta(ds) == pytest.approx(0.1 / 2 * 2.0, rel=1e-12)

    def test_missing_truth_rejected(self):
        ds = Dataset(X=np.ones((3, 2)), Y=np.zeros(3), meta={"kind": "lasso"})
        with pytest.raises(ValueError):
            regularization_zeta(ds)

    def test_crime_preset_uses_fixed_value(self):
        assert DATASET_PRESETS["crime"]["zeta"] == 0.02


class TestLibsvm:
    def test_single_entry_line(self, tmp_path):
        path = tmp_path / "one.libsvm"
        path.write_text("1 3:0.5\n")
        ds = load_libsvm(str(path))
        assert ds.Y.tolist() == [1.0]
        assert ds.p == 3
        row = ds.X.toarray()[0]
        assert row.tolist() == [0.0, 0.0, 0.5]

    def test_label_only_line(self, tmp_path):
        path = tmp_path / "two.libsvm"
        path.write_text("-1\n1 1:2.0\n")
        ds = load_libsvm(str(path))
        assert ds.Y.tolist() == [-1.0, 1.0]
        assert ds.X.toarray()[0].tolist() == [0.0]

    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(13)
        for t in range(5):
            n, p = int(rng.integers(2, 12)), int(rng.integers(2, 15))
            mask = rng.random((n, p)) < 0.4
            dense = np.where(mask, rng.standard_normal((n, p)), 0.0)
            ds = Dataset(X=sp.csr_matrix(dense), Y=rng.standard_normal(n))
            path = tmp_path / f"rt{t}.libsvm"
            save_libsvm(str(path), ds)
            back = load_libsvm(str(path), n_features=p)
            assert np.array_equal(back.X.toarray(), dense)
            assert np.array_equal(back.Y, ds.Y)

    def test_malformed_label(self, tmp_path):
        path = tmp_path / "bad.libsvm"
        path.write_text("1 1:2.0\nabc 1:2.0\n")
        with pytest.raises(ParseError) as err:
            load_libsvm(str(path))
        assert err.value.line == 2

    def test_malformed_pair(self, tmp_path):
        path = tmp_path / "bad2.libsvm"
        path.write_text("1 1:x\n")
        with pytest.raises(ParseError) as err:
            load_libsvm(str(path))
        assert err.value.line == 1

    def test_non_ascending_indices(self, tmp_path):
        path = tmp_path / "bad3.libsvm"
        path.write_text("1 1:1.0\n-1 3:1.0 2:2.0\n")
        with pytest.raises(ParseError) as err:
            load_libsvm(str(path))
        assert err.value.line == 2

    def test_zero_based_index_rejected(self, tmp_path):
        path = tmp_path / "bad4.libsvm"
        path.write_text("1 0:1.0\n")
        with pytest.raises(ParseError):
            load_libsvm(str(path))

    def test_sidecar_round_trip(self, tmp_path):
        ds = sb.gen_group_lasso(10, 3, max_group=8, seed=14)
        path = tmp_path / "grp.libsvm"
        save_libsvm(str(path), ds)
        back = load_libsvm(str(path), n_features=ds.p)
        assert back.groups == ds.groups
        assert np.allclose(back.truth[0], ds.truth[0])
        assert back.meta["kind"] == "group_lasso"


class TestCsv:
    def test_hand_written_file(self, tmp_path):
        path = tmp_path / "toy.csv"
        path.write_text("a,label,b\n1.0,5.0,2.0\n3.0,6.0,4.0\n-1.5,7.0,0.25\n")
        ds = load_csv(str(path), "label")
        assert ds.Y.tolist() == [5.0, 6.0, 7.0]
        assert ds.X.tolist() == [[1.0, 2.0], [3.0, 4.0], [-1.5, 0.25]]
        assert ds.p == 2

    def test_normalization_flag(self, tmp_path):
        path = tmp_path / "toy2.csv"
        path.write_text("x1,x2,label\n3.0,4.0,1.0\n1.0,0.0,2.0\n")
        ds = load_csv(str(path), "label", normalize_rows=True)
        norms = np.linalg.norm(ds.X, axis=1)
        assert np.allclose(norms, 1.0)

    def test_ragged_row_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,label\n1.0,2.0\n3.0\n")
        with pytest.raises(ParseError) as err:
            load_csv(str(path), "label")
        assert err.value.line == 3

    def test_non_numeric_cell_rejected(self, tmp_path):
        path = tmp_path / "bad2.csv"
        path.write_text("a,label\n1.0,2.0\nfoo,3.0\n")
        with pytest.raises(ParseError) as err:
            load_csv(str(path), "label")
        assert err.value.line == 3

    def test_missing_label_column(self, tmp_path):
        path = tmp_path / "bad3.csv"
        path.write_text("a,b\n1.0,2.0\n")
        with pytest.raises(ParseError):
            load_csv(str(path), "label")


class TestPresets:
    def test_names_available(self):
        for name in ("lasso5.1", "grouplasso5.2", "logistic5.3", "crime",
                     "e2006", "sido", "nslkdd"):
            assert name in DATASET_PRESETS

    def test_synthetic_preset_scaled_down_determinism(self):
        # full-size presets are heavy; check the generator plumbing instead
        a = generate_preset("logistic5.3", seed=3)
        b = generate_preset("logistic5.3", seed=3)
        assert np.array_equal(a.X.toarray(), b.X.toarray())
        assert a.n == 100 and a.p == 400

    def test_loader_preset_needs_file(self):
        with pytest.raises(ValueError):
            generate_preset("crime")

    def test_unknown_preset(self):
        with pytest.raises(ValueError):
            generate_preset("nope")

    def test_solvers_accept_generated_data(self):
        ds = gen_sparse_logistic(30, 20, 5, row_nnz=6, seed=15)
        prob = sb.make_problem(ds, 0.01)
        cfg = sb.SolverConfig(beta=1.0, alpha=0.5, gamma=0.3,
                              S=sb.PsdMat.scaled_identity(3.0), a=3.0,
                              eps=1e-6, max_outer=5, seed=0)
        res = sb.ss_prsm_solve(prob, cfg)
        assert res.outer_iters == 5
