import numpy as np
import pytest

import splitbench as sb
from splitbench.errors import NonconvergenceError
from splitbench.problems import Regularizer, SeparableProblem
from splitbench.reference import lasso_zeta_max, reference_solution


class TestReferenceSolution:
    def test_zeta_at_threshold_gives_zero(self):
        ds = sb.gen_lasso(40, 15, 4, noise_sd=0.05, seed=0)
        prob0 = sb.make_problem(ds, 1.0)
        zmax = lasso_zeta_max(prob0)
        z, _ = reference_solution(sb.make_problem(ds, 1.01 * zmax))
        assert np.abs(z).max() == 0.0
        # just below the threshold something survives
        z2, _ = reference_solution(sb.make_problem(ds, 0.9 * zmax))
        assert np.abs(z2).max() > 0.0

    def test_zero_zeta_matches_least_squares(self):
        rng = np.random.default_rng(1)
        X = rng.standard_normal((30, 8))
        Y = rng.standard_normal(30)
        prob = SeparableProblem(X, Y, "lasso", Regularizer("l1", 0.0))
        z, f = reference_solution(prob)
        z_ls, *_ = np.linalg.lstsq(X, Y, rcond=None)
        assert np.linalg.norm(z - z_ls) <= 1e-8

    def test_two_start_agreement(self, tiny_lasso_ref):
        prob, z_star, _ = tiny_lasso_ref
        rng = np.random.default_rng(2)
        z_other, _ = reference_solution(prob, x0=rng.standard_normal(prob.dim1))
        assert np.linalg.norm(z_other - z_star) <= 1e-8

    def test_matches_sklearn_lasso(self):
        # (1/n)||Y - Xz||^2 + zeta ||z||_1 halves to sklearn's objective
        # with alpha = zeta / 2
        from sklearn.linear_model import Lasso

        ds = sb.gen_lasso(60, 25, 6, noise_sd=0.05, seed=3)
        zeta = sb.regularization_zeta(ds) * 0.2
        prob = sb.make_problem(ds, zeta)
        z, _ = reference_solution(prob)
        skl = Lasso(alpha=zeta / 2, fit_intercept=False, tol=1e-12,
                    max_iter=10**6)
        skl.fit(ds.X, ds.Y)
        assert np.abs(z - skl.coef_).max() <= 1e-6

    def test_matches_sklearn_logistic(self):
        from sklearn.linear_model import LogisticRegression

        ds = sb.gen_sparse_logistic(80, 12, 4, row_nnz=6, noise_sd=0.05, seed=4)
        zeta = 0.02
        prob = sb.make_problem(ds, zeta)
        z, _ = reference_solution(prob)
        # sklearn minimizes C * sum log-loss + ||z||_1, so C = 1 / (n zeta)
        skl = LogisticRegression(
            penalty="l1", C=1.0 / (ds.n * zeta), solver="liblinear",
            fit_intercept=False, tol=1e-10, max_iter=10**5,
        )
        skl.fit(ds.X, ds.Y)
        assert np.abs(z - skl.coef_.ravel()).max() <= 1e-4

    def test_group_lasso_stationarity(self, tiny_group_ref):
        prob, z_star, _ = tiny_group_ref
        # fixed point of the proximal map at any step size
        g = prob.full_gradient(z_star)
        for t in (0.01, 0.1):
            back = prob.reg.prox(z_star - t * g, t)
            assert np.abs(back - z_star).max() <= 1e-9

    def test_nonconvergence_carries_best(self):
        ds = sb.gen_lasso(30, 10, 3, seed=5)
        prob = sb.make_problem(ds, 0.01)
        with pytest.raises(NonconvergenceError) as err:
            reference_solution(prob, max_iter=3)
        assert err.value.best is not None
        assert err.value.achieved > 1e-12


class TestZetaMax:
    def test_formula(self):
        ds = sb.gen_lasso(25, 12, 3, seed=6)
        prob = sb.make_problem(ds, 1.0)
        want = np.abs(2.0 / ds.n * (ds.X.T @ ds.Y)).max()
        assert lasso_zeta_max(prob) == pytest.approx(want, rel=1e-12)
