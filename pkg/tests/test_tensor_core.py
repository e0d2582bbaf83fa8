import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from tensnorm.tensor_core import (Field, RankOneDecomposition, RankOneTerm, Tensor, as_tensor,
                                  compress, contract, expand, hs_norm, inner_product, khatri_rao,
                                  outer, realify, refold, tensor_product, total_size, unfold)

shapes = st.lists(st.integers(1, 4), min_size=1, max_size=4).map(tuple)
finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@st.composite
def complex_tensors(draw, shape=None):
    shape = shape or draw(shapes)
    re = draw(arrays(np.float64, shape, elements=finite))
    im = draw(arrays(np.float64, shape, elements=finite))
    return re + 1j * im


def test_real_tag_rejects_imaginary_parts():
    with pytest.raises(ValueError):
        Tensor(np.array([1.0, 0.1j]), Field.REAL)
    t = Tensor(np.array([1.0 + 0j, 2.0]), Field.REAL)
    assert t.data.dtype == np.float64


def test_tensor_is_read_only():
    t = as_tensor(np.ones((2, 2)))
    with pytest.raises(ValueError):
        t.data[0, 0] = 3


def test_field_parse():
    assert Field.parse("R") is Field.REAL
    assert Field.parse("c") is Field.COMPLEX
    with pytest.raises(ValueError):
        Field.parse("Q")


def test_total_size_overflow():
    assert total_size((3, 4)) == 12
    with pytest.raises(OverflowError):
        total_size((2 ** 40, 2 ** 40))


def test_inner_product_is_conjugate_linear_in_second_slot():
    a = np.array([1 + 2j, 3 - 1j])
    b = np.array([2 - 1j, 1j])
    assert np.isclose(inner_product(a, b), np.sum(a * b.conj()))
    assert np.isclose(inner_product(a, 1j * b), -1j * inner_product(a, b))


def test_contract_matches_einsum(rng):
    t = rng.standard_normal((2, 3, 4)) + 1j * rng.standard_normal((2, 3, 4))
    y = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
    out = contract(t, y, [2, 0])
    assert np.allclose(out.data, np.einsum("ijk,ik->j", t, y))
    full = contract(t, t, [0, 1, 2])
    assert full.shape == () and np.isclose(full.data, np.sum(t * t))
    with pytest.raises(ValueError):
        contract(t, y, [0, 0])
    with pytest.raises(ValueError):
        contract(t, y, [0, 1])


def test_outer_and_khatri_rao(rng):
    a, b = rng.standard_normal((2, 3)), rng.standard_normal((4, 3))
    kr = khatri_rao([a, b])
    for i in range(3):
        assert np.allclose(kr[:, i], np.kron(a[:, i], b[:, i]))
    assert np.allclose(outer([a[:, 0], b[:, 0]]).data, np.outer(a[:, 0], b[:, 0]))


@given(complex_tensors())
def test_unfold_refold_bijection(a):
    for k in range(a.ndim):
        m = unfold(a, k)
        assert m.shape == (a.shape[k], a.size // a.shape[k])
        assert np.array_equal(refold(m, k, a.shape).data, a)


@given(complex_tensors())
def test_realify_is_an_isometry(a):
    r = realify(a)
    assert r.field is Field.REAL and r.shape == (2,) + a.shape
    assert np.isclose(hs_norm(r), hs_norm(a), rtol=1e-12, atol=1e-12)


@given(complex_tensors())
def test_compress_expand_roundtrip(a):
    core, bases = compress(a)
    assert np.allclose(expand(core, bases).data, a, atol=1e-9 * (1 + np.abs(a).max()))
    for b in bases:
        assert np.allclose(b.conj().T @ b, np.eye(b.shape[1]), atol=1e-10)


def test_compress_reduces_rank_deficient_modes(rng):
    u = rng.standard_normal(5)
    t = np.einsum("i,jk->ijk", u, rng.standard_normal((3, 4)))
    core, bases = compress(t)
    assert core.shape[0] == 1


def test_tensor_product_field_mismatch():
    with pytest.raises(ValueError):
        tensor_product(Tensor(np.ones(2), Field.REAL), Tensor(np.ones(2), Field.COMPLEX))
    p = tensor_product(np.ones(2), np.arange(3.0))
    assert p.shape == (2, 3)


def test_rank_one_decomposition(rng):
    terms = [RankOneTerm((rng.standard_normal(2), rng.standard_normal(3))) for _ in range(4)]
    dec = RankOneDecomposition.from_terms(terms, (2, 3), Field.REAL)
    dense = sum(np.outer(*t.factors) for t in terms)
    assert dec.rank == 4
    assert np.allclose(dec.materialize().data, dense)
    assert np.isclose(dec.bound(), sum(t.norm for t in terms))
    assert dec.residual(dense) < 1e-12
    empty = RankOneDecomposition.from_terms([], (2, 3), Field.REAL)
    assert empty.rank == 0 and empty.bound() == 0.0
