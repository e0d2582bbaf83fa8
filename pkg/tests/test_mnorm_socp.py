import numpy as np
import pytest
from hypothesis import given, strategies as st

from tensnorm.mnorm_socp import (MinSumNormsProblem, SolverOptions, Status, affine_project,
                                 dual_bound, estimate_multiplier, polish, solve)
from tensnorm.tensor_core import Field

IPM = SolverOptions(method="ipm")
ADMM = SolverOptions(method="admm", tol_abs=1e-10, tol_rel=1e-9, max_iter=200000)


def random_problem(rng, n=3, m=4, q=6, field=Field.COMPLEX):
    a = rng.standard_normal((n, m))
    v = rng.standard_normal((m, q))
    if field is Field.COMPLEX:
        a = a + 1j * rng.standard_normal((n, m))
        v = v + 1j * rng.standard_normal((m, q))
    return MinSumNormsProblem.from_factors(a, v, field=field)


@pytest.mark.parametrize("method", [IPM, ADMM], ids=["ipm", "admm"])
def test_identity_factors_give_column_norms(method, rng):
    a = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    prob = MinSumNormsProblem.from_factors(a, np.eye(4))
    sol = solve(prob, method)
    assert sol.status is Status.CONVERGED
    assert np.isclose(sol.objective, np.linalg.norm(a, axis=0).sum(), rtol=1e-7)
    assert np.allclose(sol.blocks, a, atol=1e-6)


@pytest.mark.parametrize("method", [IPM, ADMM], ids=["ipm", "admm"])
def test_single_block_is_min_norm_solution(method, rng):
    b_mat = rng.standard_normal((2, 1, 5))
    b = rng.standard_normal(2)
    prob = MinSumNormsProblem(b_mat, b, [1.0], Field.REAL)
    sol = solve(prob, method)
    expected = np.linalg.norm(np.linalg.pinv(b_mat[:, 0, :]) @ b)
    assert np.isclose(sol.objective, expected, rtol=1e-7)


@pytest.mark.parametrize("method", [IPM, ADMM], ids=["ipm", "admm"])
def test_parallel_factors_prefer_cheapest_block(method, rng):
    a_vec, v = rng.standard_normal(3), rng.standard_normal(4)
    prob = MinSumNormsProblem.from_factors(np.outer(a_vec, v), np.stack([v, 2 * v], axis=1),
                                           field=Field.REAL)
    assert np.isclose(solve(prob, method).objective, np.linalg.norm(a_vec) / 2, rtol=1e-6)
    weighted = MinSumNormsProblem.from_factors(np.outer(a_vec, v), np.stack([v, 2 * v], axis=1),
                                               weights=[1.0, 3.0], field=Field.REAL)
    assert np.isclose(solve(weighted, method).objective, np.linalg.norm(a_vec), rtol=1e-6)


def test_ipm_and_admm_agree(rng):
    for field in (Field.REAL, Field.COMPLEX):
        for _ in range(3):
            prob = random_problem(rng, field=field)
            s1, s2 = solve(prob, IPM), solve(prob, ADMM)
            assert np.isclose(s1.objective, s2.objective, rtol=1e-5)
            assert s1.residual < 1e-9 and s2.residual < 1e-9


def test_dual_certificate_is_tight_at_optimum(rng):
    prob = random_problem(rng)
    sol = solve(prob, IPM)
    assert sol.lower_bound <= sol.objective + 1e-9
    assert sol.lower_bound >= sol.objective * (1 - 1e-5)
    lam = estimate_multiplier(prob, sol.blocks)
    assert dual_bound(prob, lam) <= sol.objective + 1e-9


@given(st.integers(0, 2 ** 32 - 1))
def test_weak_duality_for_any_multiplier(seed):
    rng = np.random.default_rng(seed)
    prob = random_problem(rng, n=2, m=3, q=4)
    opt = solve(prob, IPM).objective
    lam = rng.standard_normal(prob.p) + 1j * rng.standard_normal(prob.p)
    assert dual_bound(prob, lam) <= opt * (1 + 1e-7) + 1e-9


@given(st.integers(0, 2 ** 32 - 1))
def test_affine_projection_is_feasible_and_idempotent(seed):
    rng = np.random.default_rng(seed)
    prob = random_problem(rng, n=2, m=3, q=4)
    y = rng.standard_normal((prob.n, prob.Q)) + 1j * rng.standard_normal((prob.n, prob.Q))
    p1 = affine_project(y, prob)
    assert prob.residual(p1) < 1e-10
    assert np.allclose(affine_project(p1, prob), p1, atol=1e-10)


def test_infeasible_target_is_reported(rng):
    a = rng.standard_normal((2, 2))
    prob = MinSumNormsProblem.from_factors(a, np.array([[1.0], [0.0]]), field=Field.REAL)
    sol = solve(prob)
    assert sol.status is Status.INFEASIBLE


def test_warm_start_guard_never_worsens(rng):
    prob = random_problem(rng)
    best = solve(prob, IPM)
    again = solve(prob, SolverOptions(method="admm", max_iter=3), warm_start=best.blocks)
    assert again.objective <= best.objective * (1 + 1e-9) + 1e-14


def test_polish_drops_tiny_blocks(rng):
    a_vec, v = rng.standard_normal(3), rng.standard_normal(4)
    prob = MinSumNormsProblem.from_factors(np.outer(a_vec, v), np.stack([v, 2 * v], axis=1),
                                           field=Field.REAL)
    tiny = 1e-9
    y = np.stack([tiny * a_vec, (1 - tiny) * a_vec / 2], axis=1)
    out = polish(y, prob)
    assert np.all(out[:, 0] == 0)
    assert prob.residual(out) < 1e-12
    assert prob.objective(out) <= prob.objective(y)


def test_validation():
    with pytest.raises(ValueError):
        MinSumNormsProblem(np.ones((2, 1, 2)) * 1j, np.ones(2), [1.0], Field.REAL)
    with pytest.raises(ValueError):
        MinSumNormsProblem(np.ones((2, 1, 2)), np.ones(3), [1.0])
    with pytest.raises(ValueError):
        MinSumNormsProblem(np.ones((2, 1, 2)), np.ones(2), [-1.0])
    with pytest.raises(ValueError):
        MinSumNormsProblem.from_factors(np.ones((2, 2)), np.zeros((2, 1)))
