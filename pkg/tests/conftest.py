import pytest

import splitbench as sb
from helpers import tiny_group, tiny_lasso, tiny_logistic


@pytest.fixture(scope="session")
def lasso_problem():
    ds = sb.gen_lasso(50, 20, 5, noise_sd=0.05, seed=2)
    return sb.make_problem(ds, 0.01)


@pytest.fixture(scope="session")
def group_problem():
    ds = sb.gen_group_lasso(40, 6, max_group=5, noise_sd=0.05, seed=4)
    return sb.make_problem(ds, 0.01)


@pytest.fixture(scope="session")
def logistic_problem():
    ds = sb.gen_sparse_logistic(60, 25, 6, row_nnz=8, noise_sd=0.05, seed=6)
    return sb.make_problem(ds, 0.005)


@pytest.fixture(scope="session")
def tiny_lasso_ref():
    """Conditioned tiny lasso with its reference solution."""
    ds = tiny_lasso()
    zeta = 0.05 * sb.lasso_zeta_max(sb.make_problem(ds, 1.0))
    prob = sb.make_problem(ds, zeta)
    z, f = sb.reference_solution(prob)
    return prob, z, f


@pytest.fixture(scope="session")
def tiny_group_ref():
    ds = tiny_group()
    zeta = 0.05 * sb.regularization_zeta(ds)
    prob = sb.make_problem(ds, zeta)
    z, f = sb.reference_solution(prob)
    return prob, z, f


@pytest.fixture(scope="session")
def tiny_logistic_ref():
    from helpers import logistic_zeta_max

    ds = tiny_logistic()
    prob0 = sb.make_problem(ds, 1.0)
    zeta = 0.85 * logistic_zeta_max(prob0)
    prob = sb.make_problem(ds, zeta)
    z, f = sb.reference_solution(prob)
    return prob, z, f
