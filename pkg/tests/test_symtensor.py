import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tensnorm.symtensor import (SymTensor, densify, multiplicities, project_symmetric, sorted_indices,
                                sym_coefficients, sym_from_dense, sym_hs_norm, sym_term_budget,
                                symmetrize)
from tensnorm.tensor_core import Field

nd = st.tuples(st.integers(1, 4), st.integers(1, 4))


def brute_symmetrize(vectors):
    """Average of the outer products over every ordering of the vectors."""
    d = len(vectors)
    acc = 0
    for perm in itertools.permutations(range(d)):
        t = vectors[perm[0]]
        for j in perm[1:]:
            t = np.multiply.outer(t, vectors[j])
        acc = acc + t
    return acc / math.factorial(d)


def test_index_table_sizes():
    for n, d in [(2, 3), (3, 2), (4, 4)]:
        idx = sorted_indices(n, d)
        assert len(idx) == math.comb(n + d - 1, d)
        assert np.all(np.diff(idx, axis=1) >= 0)
        assert multiplicities(n, d).sum() == n ** d


@given(nd, st.integers(0, 2 ** 32 - 1))
def test_symmetrize_matches_permutation_average(shape, seed):
    n, d = shape
    rng = np.random.default_rng(seed)
    vecs = [rng.standard_normal(n) + 1j * rng.standard_normal(n) for _ in range(d)]
    assert np.allclose(densify(symmetrize(*vecs)).data, brute_symmetrize(vecs))


def test_batched_coefficients_match_single_terms(rng):
    f = rng.standard_normal((3, 2, 5))
    batch = sym_coefficients(f)
    for i in range(5):
        assert np.allclose(batch[:, i], symmetrize(*f[:, :, i]).coeffs)


@given(nd, st.integers(0, 2 ** 32 - 1))
def test_dense_roundtrip_and_norm(shape, seed):
    n, d = shape
    rng = np.random.default_rng(seed)
    s = SymTensor(n, d, rng.standard_normal(math.comb(n + d - 1, d)), Field.REAL)
    dense = densify(s)
    back = sym_from_dense(dense)
    assert np.array_equal(back.coeffs, s.coeffs)
    assert np.isclose(sym_hs_norm(s), np.linalg.norm(dense.data))


def test_non_symmetric_rejected():
    with pytest.raises(ValueError):
        sym_from_dense(np.arange(4.0).reshape(2, 2))
    with pytest.raises(ValueError):
        sym_from_dense(np.ones((2, 3)))


def test_projection_is_idempotent(rng):
    t = rng.standard_normal((3, 3, 3))
    p = project_symmetric(t)
    assert np.allclose(project_symmetric(densify(p)).coeffs, p.coeffs)
    # orthogonal projection: the remainder is orthogonal to the symmetric part
    assert abs(np.vdot(densify(p).data, t - densify(p).data)) < 1e-12


def test_from_dict_any_index_order():
    s = SymTensor.from_dict(2, 3, {(1, 0, 0): 0.5}, Field.REAL)
    dense = densify(s).data
    assert dense[0, 0, 1] == dense[1, 0, 0] == 0.5
    assert s.monomials()[(2, 1)] == 0.5
    with pytest.raises(ValueError):
        SymTensor.from_dict(2, 3, {(0, 0, 2): 1.0})


def test_wrong_coefficient_count():
    with pytest.raises(ValueError):
        SymTensor(2, 3, np.zeros(3))


def test_term_budget_conventions():
    assert sym_term_budget(2, 3, "R", "d") == 4
    assert sym_term_budget(2, 3, "R", "d-1") == 6
    assert sym_term_budget(2, 3, "R") == 6
    assert sym_term_budget(2, 3, "C") == 12
    assert sym_term_budget(2, 2, "C") == 6
    assert sym_term_budget(1, 4, "R") == 4
    with pytest.raises(ValueError):
        sym_term_budget(2, 3, "R", "other")
