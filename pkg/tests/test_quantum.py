import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tensnorm.nuclear import AltOptions
from tensnorm.quantum import (DensityTensor, Verdict, dtrace, known_state, known_state_names,
                              ppt_check, pure_density, qubit_bounds, separability_check,
                              separable_mixture)
from tensnorm.spectral import random_unit
from tensnorm.tensor_core import Field, hs_norm, outer

FAST = AltOptions(restarts=2)
BELL = np.array([[1, 0], [0, 1]]) / np.sqrt(2)


def test_density_validation():
    rho = np.eye(4).reshape(2, 2, 2, 2) / 4
    assert DensityTensor.from_array(rho).d == 2
    with pytest.raises(ValueError, match="trace"):
        DensityTensor.from_array(2 * rho)
    bad = np.diag([1.5, -0.5, 0, 0]).reshape(2, 2, 2, 2)
    with pytest.raises(ValueError, match="PSD"):
        DensityTensor.from_array(bad)
    herm = np.eye(4, dtype=complex) / 4
    herm[0, 1] = 0.1j
    with pytest.raises(ValueError, match="hermitian"):
        DensityTensor.from_array(herm.reshape(2, 2, 2, 2))
    with pytest.raises(ValueError):
        DensityTensor.from_array(np.ones((2, 2, 2)) / 2)
    unchecked = DensityTensor.from_array(2 * rho, check=False)
    assert not unchecked.psd_checked


def test_pure_density_and_trace():
    rho = pure_density(BELL)
    assert np.isclose(dtrace(rho), 1.0)
    assert np.isclose(dtrace(rho.tensor), 1.0)
    with pytest.raises(ValueError):
        pure_density(2 * BELL)


def test_bell_state_is_entangled():
    v = separability_check(pure_density(BELL), opts=FAST)
    assert v.status is Verdict.ENTANGLED and not v.heuristic
    assert np.isclose(v.nuclear_value, 2.0, atol=1e-4)
    assert v.ppt_min_eigenvalues[(0,)] == pytest.approx(-0.5)


@pytest.mark.parametrize("b", [1.0, 0.75, 0.6, 0.5, 1 / 3, 0.25, 0.0])
def test_ppt_eigenvalue_oracle_werner(b):
    passed, low = ppt_check(known_state("werner", b=b), (0,))
    assert low == pytest.approx((1 - 3 * b) / 4, abs=1e-12)
    assert passed == (b <= 1 / 3)


@settings(max_examples=5)
@given(st.integers(0, 2 ** 32 - 1))
def test_separable_mixture_has_unit_nuclear_norm(seed):
    rng = np.random.default_rng(seed)
    r = int(rng.integers(1, 5))
    states = [[random_unit(2, Field.COMPLEX, rng) for _ in range(2)] for _ in range(r)]
    rho = separable_mixture(rng.dirichlet(np.ones(r)), states)
    v = separability_check(rho, 2e-3, FAST)
    assert v.status is Verdict.SEPARABLE
    assert 1 - 1e-6 <= v.nuclear_value <= 1 + 2e-3


def test_separable_mixture_accepts_dense_products(rng):
    x = outer([random_unit(2, Field.COMPLEX, rng), random_unit(3, Field.COMPLEX, rng)])
    rho = separable_mixture([1.0], [x])
    assert rho.base_shape == (2, 3)
    with pytest.raises(ValueError):
        separable_mixture([1.0], [BELL])
    with pytest.raises(ValueError):
        separable_mixture([0.5, 0.6], [x, x])


def test_ppt_subset_validation():
    rho = pure_density(BELL)
    with pytest.raises(ValueError):
        ppt_check(rho, ())
    with pytest.raises(ValueError):
        ppt_check(rho, (0, 1))


def test_catalogue_states_are_normalised():
    for name in known_state_names():
        if name in ("werner", "horodecki-2x4"):
            rho = known_state(name, b=0.5)
            assert np.isclose(dtrace(rho), 1.0)
            continue
        params = {"nonsym-qubits": {"row": 1}, "sym-qubits": {"row": 2}}.get(name, {})
        assert np.isclose(hs_norm(known_state(name, **params)), 1.0)
    with pytest.raises(ValueError):
        known_state("nope")
    with pytest.raises(ValueError):
        known_state("W", colour=3)


def test_catalogue_rows():
    for row in range(1, 7):
        assert np.isclose(hs_norm(known_state("nonsym-qubits", row=row)), 1.0)
    for row in range(1, 11):
        t = known_state("sym-qubits", row=row)
        assert np.isclose(hs_norm(t), 1.0)
        assert np.allclose(t.data, np.transpose(t.data, np.arange(t.ndim)[::-1]))
    assert known_state("T", n=3, lam=-1j).field is Field.REAL


def test_qubit_bounds():
    recs = {r.quantity: r for r in qubit_bounds((2, 2, 2), Field.COMPLEX)}
    assert recs["beta"].value == pytest.approx(2 / 3) and recs["alpha"].value == pytest.approx(1.5)
    recs = {r.quantity: r for r in qubit_bounds((2, 2, 2, 2), Field.REAL)}
    assert recs["beta"].value == pytest.approx(2 ** -1.5)
    recs = {r.quantity: r for r in qubit_bounds((2, 2, 2, 2, 2), Field.COMPLEX)}
    assert recs["beta"].kind == "lower" and recs["alpha"].kind == "upper"
    assert recs["alpha"].value * recs["beta"].value == pytest.approx(1.0)
    assert recs["beta"].value == pytest.approx(np.sqrt(2) / 3 / np.sqrt(2))
